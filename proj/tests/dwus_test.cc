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

#include <cstdlib>
#include <set>

#include "net_oracles.h"
#include "oracles.h"
#include "pointsoup/base/error.h"
#include "pointsoup/dwus/dwus.h"

namespace pointsoup::dwus {
namespace {

using geom::Vec3;
using testing::Mat;

DwusConfig SmallConfig() {
  DwusConfig c;
  c.channels = 6;
  c.refine_hidden = 5;
  c.grid_rows = 10;
  c.grid_dim = 3;
  c.fold1_hidden = {7};
  c.fold2_hidden = {8, 4};
  c.points_per_row = 2;
  return c;
}

struct Net {
  nn::ModelWeights weights;
  DwusNetwork net;
  explicit Net(const DwusConfig& config, uint64_t seed = 1) : net(weights, config) {
    Rng rng(seed);
    net.Initialize(rng);
  }
};

nn::Tensor RandomTensor(Rng& rng, std::vector<int64_t> shape, double scale = 1.0) {
  nn::Tensor t(std::move(shape));
  for (nn::Real& v : t.values()) v = static_cast<nn::Real>(rng.Uniform(-scale, scale));
  return t;
}

Mat Row(const nn::Tensor& t, int64_t r) {
  Mat m(1, t.cols());
  for (int64_t c = 0; c < t.cols(); ++c) m.at(0, c) = t.at(r, c);
  return m;
}

// Folding of one feature row through the scalar MLPs.
Mat FoldRef(const nn::ModelWeights& w, const DwusConfig& config, const Mat& feature,
            const std::vector<int32_t>& rows) {
  const Mat grid = testing::MlpRef(w, "dwus.fold1", feature);
  const int64_t d = config.grid_dim, c = config.channels, u = config.points_per_row;
  Mat input(static_cast<int64_t>(rows.size()), d + c);
  for (size_t j = 0; j < rows.size(); ++j) {
    for (int64_t a = 0; a < d; ++a) input.at(j, a) = grid.at(0, rows[j] * d + a);
    for (int64_t a = 0; a < c; ++a) input.at(j, d + a) = feature.at(0, a);
  }
  const Mat out = testing::MlpRef(w, "dwus.fold2", input);
  Mat pts(static_cast<int64_t>(rows.size()) * u, 3);
  pts.v = out.v;
  return pts;
}

std::vector<Vec3> Points(const geom::PointCloud& c) {
  return std::vector<Vec3>(c.points().begin(), c.points().end());
}

awds::Bones RandomBones(Rng& rng, size_t m) {
  return awds::MakeBones(testing::RandomGridPoints(rng, m));
}

TEST(SelectRows, InferIsStridedAndTrainIsSeededSubset) {
  std::vector<int32_t> all(64);
  for (int i = 0; i < 64; ++i) all[i] = i;
  EXPECT_EQ(SelectRows(64, 64, FoldMode::kInfer, nullptr), all);
  EXPECT_EQ(SelectRows(4, 64, FoldMode::kInfer, nullptr), (std::vector<int32_t>{0, 16, 32, 48}));
  EXPECT_EQ(SelectRows(3, 10, FoldMode::kInfer, nullptr), (std::vector<int32_t>{0, 3, 6}));
  Rng a(5), b(5);
  const std::vector<int32_t> rows = SelectRows(20, 64, FoldMode::kTrain, &a);
  EXPECT_EQ(rows, SelectRows(20, 64, FoldMode::kTrain, &b));
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
  EXPECT_EQ(std::set<int32_t>(rows.begin(), rows.end()).size(), 20u);
  EXPECT_THROW(SelectRows(65, 64, FoldMode::kInfer, nullptr), Error);
  EXPECT_THROW(SelectRows(0, 64, FoldMode::kInfer, nullptr), Error);
  EXPECT_THROW(SelectRows(3, 64, FoldMode::kTrain, nullptr), Error);
}

TEST(SelectRows, TrainSubsetsCoverAllRows) {
  Rng rng(6);
  std::vector<int> hits(16);
  for (int t = 0; t < 4000; ++t) {
    for (int32_t r : SelectRows(4, 16, FoldMode::kTrain, &rng)) ++hits[r];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(GridRows, Formula) {
  EXPECT_EQ(GridRows(128), 32);
  EXPECT_EQ(GridRows(256), 64);
  EXPECT_EQ(GridRows(16), 4);
  EXPECT_EQ(GridRows(3), 1);
  EXPECT_EQ(GridRows(130, 4), 32);
}

TEST(Refine, ZeroOutputLayerIsIdentity) {
  Net n(SmallConfig());
  n.net.refine_mlp().ZeroOutputLayer();
  Rng rng(1);
  const awds::Bones bones = RandomBones(rng, 12);
  const dwem::DilatedWindows dw = dwem::BuildDilatedWindows(bones, 8);
  // The zeroed layer includes its bias, so the branch contributes 0.
  const nn::Tensor f = RandomTensor(rng, {12, 6});
  EXPECT_EQ(n.net.Refine(nn::Constant(f), dw).value(), f);
}

TEST(Refine, IdenticalNeighborsReduceToSingleMlp) {
  Net n(SmallConfig());
  Rng rng(2);
  dwem::DilatedWindows dw;
  dw.count = 1;
  dw.size = 4;
  dw.indices = {0, 0, 0, 0};
  dw.rel.assign(4, Vec3{0, 0, 0});
  const nn::Tensor f = RandomTensor(rng, {1, 6});
  Mat input(1, 9);
  for (int c = 0; c < 6; ++c) input.at(0, c) = f[c];
  const Mat mlp = testing::MlpRef(n.weights, "dwus.refine", input);
  const nn::Tensor got = n.net.Refine(nn::Constant(f), dw).value();
  for (int c = 0; c < 6; ++c) EXPECT_NEAR(got[c], f[c] + mlp.at(0, c), 1e-6);
}

TEST(Refine, MatchesScalarReference) {
  Net n(SmallConfig());
  Rng rng(3);
  const awds::Bones bones = RandomBones(rng, 8);
  const dwem::DilatedWindows dw = dwem::BuildDilatedWindows(bones, 8);
  const nn::Tensor f = RandomTensor(rng, {8, 6});
  const nn::Tensor got = n.net.Refine(nn::Constant(f), dw).value();
  for (int64_t i = 0; i < 8; ++i) {
    Mat groups(8, 9);
    for (int64_t j = 0; j < 8; ++j) {
      const size_t s = static_cast<size_t>(i * 8 + j);
      for (int c = 0; c < 6; ++c) groups.at(j, c) = f.at(dw.indices[s], c);
      for (int a = 0; a < 3; ++a) groups.at(j, 6 + a) = dw.rel[s][a];
    }
    const Mat pooled = testing::GroupMaxRef(testing::MlpRef(n.weights, "dwus.refine", groups), 8);
    for (int c = 0; c < 6; ++c) EXPECT_NEAR(got.at(i, c), f.at(i, c) + pooled.at(0, c), 1e-5);
  }
  EXPECT_THROW(n.net.Refine(nn::Constant(RandomTensor(rng, {7, 6})), dw), Error);
}

TEST(Fold, MatchesScalarReference) {
  const DwusConfig config = SmallConfig();
  Net n(config);
  Rng rng(4);
  const nn::Tensor f = RandomTensor(rng, {3, 6});
  const nn::Tensor got = n.net.Fold(nn::Constant(f), 4, FoldMode::kInfer, nullptr).value();
  ASSERT_EQ(got.shape(), (std::vector<int64_t>{3 * 4 * 2, 3}));
  const std::vector<int32_t> rows = SelectRows(4, 10, FoldMode::kInfer, nullptr);
  for (int64_t w = 0; w < 3; ++w) {
    const Mat want = FoldRef(n.weights, config, Row(f, w), rows);
    for (int64_t i = 0; i < 8; ++i) {
      for (int a = 0; a < 3; ++a) EXPECT_NEAR(got.at(w * 8 + i, a), want.at(i, a), 1e-5);
    }
  }
  // Train mode draws its own rows per window.
  Rng train_rng(9), replay(9);
  const nn::Tensor t = n.net.Fold(nn::Constant(f), 4, FoldMode::kTrain, &train_rng).value();
  for (int64_t w = 0; w < 3; ++w) {
    const Mat want = FoldRef(n.weights, config, Row(f, w),
                             SelectRows(4, 10, FoldMode::kTrain, &replay));
    for (int64_t i = 0; i < 8; ++i) {
      for (int a = 0; a < 3; ++a) EXPECT_NEAR(t.at(w * 8 + i, a), want.at(i, a), 1e-5);
    }
  }
}

TEST(Fold, InferIsDeterministicAndRejectsLargeR) {
  Net n(DwusConfig{});
  Rng rng(5);
  const nn::Tensor f = RandomTensor(rng, {4, 128});
  const nn::Tensor a = n.net.Fold(nn::Constant(f), 32, FoldMode::kInfer, nullptr).value();
  EXPECT_EQ(a, n.net.Fold(nn::Constant(f), 32, FoldMode::kInfer, nullptr).value());
  EXPECT_EQ(a.rows(), 4 * 32 * 2);
  EXPECT_THROW(n.net.Fold(nn::Constant(f), 65, FoldMode::kInfer, nullptr), Error);
}

TEST(InverseAlign, OriginMapsToBoneAndAlignIsInverted) {
  Rng rng(6);
  const std::vector<Vec3> pts = testing::RandomGridPoints(rng, 400);
  const geom::PointCloud cloud(pts);
  const awds::Bones bones = awds::SampleBones(cloud, 20, 1);
  const awds::AlignedWindowSet set = awds::BuildAlignedWindows(cloud, bones, 16);
  const geom::PointCloud back = InverseAlign(set.coords, bones.points, bones.density, 16);
  for (size_t i = 0; i < back.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double want = cloud[set.indices[i]][a];
      EXPECT_NEAR(back[i][a], want, 1e-9 * std::max(1.0, std::abs(want)));
    }
  }
  for (int64_t w = 0; w < set.count; ++w) {
    EXPECT_EQ(back[static_cast<size_t>(w * 16)], bones.points[w]);
  }
  const nn::Tensor zeros({20 * 3, 3});
  const geom::PointCloud at_bones = InverseAlign(zeros, bones.points, bones.density, 3);
  ASSERT_EQ(at_bones.size(), 60u);
  for (size_t i = 0; i < 60; ++i) EXPECT_EQ(at_bones[i], bones.points[i / 3]);
  EXPECT_THROW(InverseAlign(zeros, bones.points, bones.density, 4), Error);
}

TEST(InverseAlign, VarFormMatchesTensorForm) {
  Rng rng(7);
  const awds::Bones bones = RandomBones(rng, 5);
  const nn::Tensor aligned = RandomTensor(rng, {5 * 4, 3});
  const nn::Tensor v = InverseAlignVar(nn::Constant(aligned), bones.points, bones.density, 4).value();
  const geom::PointCloud c = InverseAlign(aligned, bones.points, bones.density, 4);
  for (int64_t i = 0; i < 20; ++i) {
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(v.at(i, a), c[i][a], 1e-3);
  }
}

TEST(DwusDecode, CountsAndDeterminism) {
  Net n(DwusConfig{});
  Rng rng(8);
  const awds::Bones bones = RandomBones(rng, 16);
  const dwem::DilatedWindows dw = dwem::BuildDilatedWindows(bones, 8);
  const nn::Tensor f = RandomTensor(rng, {16, 128});
  const geom::PointCloud out = DwusDecode(n.net, nn::Constant(f), bones, dw, 128);
  EXPECT_EQ(out.size(), 16u * 32 * 2);
  EXPECT_NO_THROW(out.Validate());
  const geom::PointCloud again = DwusDecode(n.net, nn::Constant(f), bones, dw, 128);
  EXPECT_EQ(Points(out), Points(again));
  EXPECT_EQ(DwusDecode(n.net, nn::Constant(f), bones, dw, 16).size(), 16u * 4 * 2);

  setenv("POINTSOUP_THREADS", "1", 1);
  const geom::PointCloud serial = DwusDecode(n.net, nn::Constant(f), bones, dw, 128);
  setenv("POINTSOUP_THREADS", "4", 1);
  const geom::PointCloud threaded = DwusDecode(n.net, nn::Constant(f), bones, dw, 128);
  unsetenv("POINTSOUP_THREADS");
  EXPECT_EQ(Points(serial), Points(threaded));
}

}  // namespace
}  // namespace pointsoup::dwus
