// Copyright 2026 The Pointsoup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "net_oracles.h"
#include "oracles.h"
#include "pointsoup/awds/awds.h"
#include "pointsoup/base/error.h"
#include "pointsoup/geom/metrics.h"
#include "pointsoup/geom/sampling.h"
#include "pointsoup/train/synthetic.h"

namespace pointsoup::awds {
namespace {

using geom::PointCloud;
using geom::Vec3;
using testing::Mat;

AwdsConfig SmallConfig() { return AwdsConfig{16, 8, 4, 2}; }

struct Net {
  nn::ModelWeights weights;
  AwdsNetwork net;
  explicit Net(const AwdsConfig& config, uint64_t seed = 1) : net(weights, config) {
    Rng rng(seed);
    net.Initialize(rng);
  }
};

// Scalar composition for one window: per-row k_m nearest rows (distance,
// then index), embedding MLP on each neighbor's coordinates, max over the
// neighborhood, attention blocks, max over the window.
std::vector<double> AggregateRef(const nn::ModelWeights& w, const AwdsConfig& config,
                                 const std::vector<Vec3>& window) {
  const int64_t k = static_cast<int64_t>(window.size());
  const int64_t k_m = std::min(config.intra_neighbors, k);
  Mat coords(k, 3);
  for (int64_t i = 0; i < k; ++i) {
    for (int a = 0; a < 3; ++a) coords.at(i, a) = window[i][a];
  }
  const Mat per_point = testing::MlpRef(w, "awds.embed", coords);
  Mat f(k, config.channels);
  for (int64_t i = 0; i < k; ++i) {
    const std::vector<int32_t> nbr = testing::BruteKnn(window, window[i], k_m);
    for (int64_t c = 0; c < config.channels; ++c) {
      double best = -INFINITY;
      for (int32_t j : nbr) best = std::max(best, per_point.at(j, c));
      f.at(i, c) = best;
    }
  }
  for (int64_t l = 0; l < config.blocks; ++l) {
    f = testing::AttentionRef(w, "awds.attn." + std::to_string(l), f, coords);
  }
  const Mat pooled = testing::GroupMaxRef(f, k);
  return pooled.v;
}

std::vector<Vec3> RandomWindow(Rng& rng, size_t k) {
  std::vector<Vec3> w = testing::RandomPoints(rng, k, -1.5, 1.5);
  w[0] = {0, 0, 0};
  return w;
}

nn::Tensor Aggregate(const AwdsNetwork& net, const std::vector<Vec3>& window) {
  AlignedWindowSet set;
  set.count = 1;
  set.size = static_cast<int64_t>(window.size());
  set.coords = window;
  set.indices.resize(window.size());
  return net.Forward(set, 0, 1).value();
}

TEST(BoneCount, Formula) {
  EXPECT_EQ(BoneCount(1024, 128), 16u);
  EXPECT_EQ(BoneCount(256, 128), 4u);
  EXPECT_EQ(BoneCount(1067709, 128), 16682u);
  EXPECT_EQ(BoneCount(100, 128), 2u);
  EXPECT_THROW(BoneCount(10, 0), Error);
}

TEST(SampleBones, SmallCloudIsPureFps) {
  Rng rng(1);
  const std::vector<Vec3> pts = testing::RandomGridPoints(rng, 300);
  const PointCloud cloud(pts);
  const Bones bones = SampleBones(cloud, 20, 99);
  const std::vector<int32_t> want = testing::BruteFps(pts, 20);
  EXPECT_EQ(bones.source, want);
  for (size_t i = 0; i < bones.size(); ++i) EXPECT_EQ(bones.points[i], cloud[want[i]]);
}

TEST(SampleBones, WholeCloudWhenMEqualsN) {
  Rng rng(2);
  const PointCloud cloud(testing::RandomGridPoints(rng, 50));
  const Bones bones = SampleBones(cloud, 50, 3);
  std::vector<int32_t> sorted = bones.source;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int32_t> all(50);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(sorted, all);
}

TEST(SampleBones, MatchesTwoStageReference) {
  Rng rng(3);
  const PointCloud cloud(testing::RandomGridPoints(rng, 4096));
  const uint64_t seed = 1234;
  const Bones bones = SampleBones(cloud, 32, seed);
  const std::vector<int32_t> subset = geom::RandomSample(4096, 16 * 32, seed);
  std::vector<Vec3> cand;
  for (int32_t i : subset) cand.push_back(cloud[i]);
  std::vector<int32_t> want;
  for (int32_t j : testing::BruteFps(cand, 32)) want.push_back(subset[j]);
  EXPECT_EQ(bones.source, want);
  EXPECT_EQ(bones.density, geom::MeanNearestNeighborDistance(bones.points));
  EXPECT_NEAR(bones.density, testing::BruteMeanNn(bones.points), 1e-12);
  EXPECT_EQ(SampleBones(cloud, 32, seed).source, bones.source);
}

TEST(SampleBones, Errors) {
  Rng rng(4);
  const PointCloud cloud(testing::RandomGridPoints(rng, 10));
  EXPECT_THROW(SampleBones(cloud, 11, 0), Error);
  EXPECT_THROW(SampleBones(cloud, 1, 0), Error);
  const PointCloud same(std::vector<Vec3>(10, Vec3{1, 2, 3}));
  try {
    SampleBones(same, 4, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
  }
}

TEST(AlignedWindows, MatchBruteForceOracle) {
  Rng rng(5);
  const std::vector<Vec3> pts = testing::RandomGridPoints(rng, 512);
  const PointCloud cloud(pts);
  const Bones bones = SampleBones(cloud, 64, 7);
  const AlignedWindowSet set = BuildAlignedWindows(cloud, bones, 16);
  ASSERT_EQ(set.count, 64);
  ASSERT_EQ(set.size, 16);
  for (int64_t w = 0; w < set.count; ++w) {
    const std::vector<int32_t> knn = testing::BruteKnn(pts, bones.points[w], 16);
    for (int64_t j = 0; j < 16; ++j) {
      const size_t r = static_cast<size_t>(w * 16 + j);
      ASSERT_EQ(set.indices[r], knn[j]);
      for (int a = 0; a < 3; ++a) {
        EXPECT_EQ(set.coords[r][a], (cloud[knn[j]][a] - bones.points[w][a]) / bones.density);
      }
    }
    EXPECT_EQ(set.coords[static_cast<size_t>(w * 16)], (Vec3{0, 0, 0}));
  }
  EXPECT_THROW(BuildAlignedWindows(cloud, bones, 513), Error);
}

TEST(AlignedWindows, InvariantToTranslationAndScale) {
  Rng rng(6);
  const std::vector<Vec3> pts = testing::RandomPoints(rng, 800, 0, 50);
  for (const auto& [s, t] : {std::pair{3.7, Vec3{-11, 4.5, 1e3}}, std::pair{0.01, Vec3{5, 5, 5}}}) {
    std::vector<Vec3> moved = pts;
    for (Vec3& p : moved) {
      for (int a = 0; a < 3; ++a) p[a] = p[a] * s + t[a];
    }
    const PointCloud a(pts), b(moved);
    const Bones ba = SampleBones(a, 40, 8), bb = SampleBones(b, 40, 8);
    ASSERT_EQ(ba.source, bb.source);
    const AlignedWindowSet wa = BuildAlignedWindows(a, ba, 32);
    const AlignedWindowSet wb = BuildAlignedWindows(b, bb, 32);
    ASSERT_EQ(wa.indices, wb.indices);
    for (size_t r = 0; r < wa.coords.size(); ++r) {
      for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(wa.coords[r][k], wb.coords[r][k],
                    1e-12 * std::max(1.0, std::abs(wa.coords[r][k])) * 1e3);
      }
    }
    Net net(SmallConfig());
    const nn::Tensor fa = net.net.Forward(wa, 0, wa.count).value();
    const nn::Tensor fb = net.net.Forward(wb, 0, wb.count).value();
    for (int64_t i = 0; i < fa.numel(); ++i) EXPECT_NEAR(fa[i], fb[i], 1e-5);
  }
}

TEST(AlignedWindows, SyntheticCloudsAreCovered) {
  for (int shape = 0; shape < 4; ++shape) {
    train::SyntheticSpec spec;
    spec.shape = static_cast<train::Shape>(shape);
    spec.points = 4096;
    const PointCloud cloud = train::GenerateSynthetic(spec, 10 + shape);
    for (int64_t k : {16, 64, 128}) {
      const Bones bones = SampleBones(cloud, BoneCount(cloud.size(), k), 1);
      const AlignedWindowSet set = BuildAlignedWindows(cloud, bones, k);
      EXPECT_GE(set.count * k, static_cast<int64_t>(cloud.size()));
      std::vector<bool> seen(cloud.size());
      for (int32_t i : set.indices) seen[i] = true;
      // The 2x overlap leaves a few stragglers (measured up to 13 of 4096).
      EXPECT_LE(std::count(seen.begin(), seen.end(), false), 41)
          << train::ShapeName(spec.shape) << " K=" << k;
    }
  }
}

TEST(IntraNeighbors, MatchBruteForceAndClamp) {
  Rng rng(7);
  AlignedWindowSet set;
  set.count = 3;
  set.size = 10;
  for (int w = 0; w < 3; ++w) {
    for (const Vec3& p : RandomWindow(rng, 10)) set.coords.push_back(p);
  }
  set.indices.resize(30);
  const std::vector<int32_t> nbr = IntraWindowNeighbors(set, 1, 3, 4);
  ASSERT_EQ(nbr.size(), 2u * 10 * 4);
  for (int w = 1; w < 3; ++w) {
    const std::vector<Vec3> pts(set.coords.begin() + w * 10, set.coords.begin() + w * 10 + 10);
    for (int i = 0; i < 10; ++i) {
      const std::vector<int32_t> want = testing::BruteKnn(pts, pts[i], 4);
      for (int j = 0; j < 4; ++j) EXPECT_EQ(nbr[((w - 1) * 10 + i) * 4 + j], (w - 1) * 10 + want[j]);
    }
  }
  EXPECT_THROW(IntraWindowNeighbors(set, 0, 1, 11), Error);
  Net net(SmallConfig());
  EXPECT_EQ(net.net.effective_neighbors(2), 2);
  EXPECT_EQ(net.net.effective_neighbors(128), 4);
}

TEST(Aggregate, MatchesScalarReference) {
  Rng rng(8);
  Net small(SmallConfig());
  for (size_t k : {1u, 3u, 16u}) {
    const std::vector<Vec3> window = RandomWindow(rng, k);
    const nn::Tensor got = Aggregate(small.net, window);
    const std::vector<double> want = AggregateRef(small.weights, SmallConfig(), window);
    for (size_t c = 0; c < want.size(); ++c) EXPECT_NEAR(got[c], want[c], 1e-5) << "K=" << k;
  }
}

TEST(Aggregate, DefaultWidthsOnFullWindow) {
  Rng rng(9);
  const AwdsConfig config;
  Net net(config, 2);
  const std::vector<Vec3> window = RandomWindow(rng, 128);
  const nn::Tensor got = Aggregate(net.net, window);
  ASSERT_EQ(got.cols(), 128);
  const std::vector<double> want = AggregateRef(net.weights, config, window);
  for (size_t c = 0; c < want.size(); ++c) EXPECT_NEAR(got[c], want[c], 1e-4);
}

TEST(Aggregate, ZeroedValueMlpsReduceToPooledEmbedding) {
  Rng rng(10);
  Net net(SmallConfig());
  for (auto& block : net.net.blocks()) block.value_mlp().ZeroOutputLayer();
  const std::vector<Vec3> window = RandomWindow(rng, 12);
  const nn::Tensor got = Aggregate(net.net, window);
  AwdsConfig bare = SmallConfig();
  bare.blocks = 0;
  const std::vector<double> want = AggregateRef(net.weights, bare, window);
  for (size_t c = 0; c < want.size(); ++c) EXPECT_NEAR(got[c], want[c], 1e-6);
}

TEST(Aggregate, RowPermutationInvariant) {
  Rng rng(11);
  Net net(AwdsConfig{32, 16, 8, 2});
  std::vector<Vec3> window = RandomWindow(rng, 64);
  const nn::Tensor a = Aggregate(net.net, window);
  std::shuffle(window.begin() + 1, window.end(), std::mt19937_64(5));
  const nn::Tensor b = Aggregate(net.net, window);
  for (int64_t c = 0; c < a.numel(); ++c) EXPECT_NEAR(a[c], b[c], 1e-5);
}

TEST(AwdsEncode, ShapesAndDeterminism) {
  train::SyntheticSpec spec;
  spec.points = 1024;
  const PointCloud cloud = train::GenerateSynthetic(spec, 3);
  Net net(AwdsConfig{});
  const AwdsOutput out = AwdsEncode(cloud, 128, net.net, 5);
  EXPECT_EQ(out.bones.size(), 16u);
  EXPECT_EQ(out.features.rows(), 16);
  EXPECT_EQ(out.features.cols(), 128);
  EXPECT_TRUE(out.features.AllFinite());
  for (size_t i = 0; i < out.bones.size(); ++i) {
    EXPECT_EQ(out.bones.points[i], cloud[out.bones.source[i]]);
    for (double v : out.bones.points[i]) EXPECT_EQ(v, std::floor(v));
  }
  const AwdsOutput again = AwdsEncode(cloud, 128, net.net, 5);
  EXPECT_EQ(again.features, out.features);

  spec.points = 256;
  EXPECT_EQ(AwdsEncode(train::GenerateSynthetic(spec, 3), 128, net.net, 5).bones.size(), 4u);
  spec.points = 100;
  EXPECT_THROW(AwdsEncode(train::GenerateSynthetic(spec, 3), 128, net.net, 5), Error);
}

TEST(AwdsEncode, InputOrderDoesNotChangeFeaturesForFixedBones) {
  Rng rng(12);
  const std::vector<Vec3> pts = testing::RandomPoints(rng, 600, 0, 100);
  std::vector<int32_t> perm(pts.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  std::vector<Vec3> shuffled;
  for (int32_t i : perm) shuffled.push_back(pts[i]);
  const PointCloud a(pts), b(shuffled);
  const Bones bones = SampleBones(a, 20, 1);
  Bones bones_b = MakeBones(bones.points);
  Net net(SmallConfig());
  const nn::Tensor fa = net.net.Forward(BuildAlignedWindows(a, bones, 32), 0, 20).value();
  const nn::Tensor fb = net.net.Forward(BuildAlignedWindows(b, bones_b, 32), 0, 20).value();
  for (int64_t i = 0; i < fa.numel(); ++i) EXPECT_NEAR(fa[i], fb[i], 1e-5);
}

}  // namespace
}  // namespace pointsoup::awds
