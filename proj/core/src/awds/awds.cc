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

#include "pointsoup/awds/awds.h"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "pointsoup/base/error.h"
#include "pointsoup/base/parallel.h"
#include "pointsoup/geom/metrics.h"
#include "pointsoup/geom/sampling.h"
#include "pointsoup/nn/ops.h"

namespace pointsoup::awds {

Bones MakeBones(std::vector<Vec3> points) {
  Require(points.size() >= 2, "bones: need at least two bones to define a density");
  Bones bones;
  bones.density = geom::MeanNearestNeighborDistance(points);
  if (!(bones.density > 0.0)) {
    Fail(ErrorCode::kNumeric, "bones: all bones coincide, density is zero");
  }
  bones.points = std::move(points);
  return bones;
}

Bones SampleBones(const geom::PointCloud& cloud, size_t m, uint64_t seed,
                  size_t rps_factor) {
  const size_t n = cloud.size();
  Require(m <= n, "sample_bones: M=" + std::to_string(m) +
                      " exceeds point count " + std::to_string(n));
  Require(m >= 2, "sample_bones: M must be at least 2");
  Require(rps_factor >= 1, "sample_bones: subset factor must be positive");
  std::vector<int32_t> subset;
  if (n > rps_factor * m) {
    subset = geom::RandomSample(n, rps_factor * m, seed);
  } else {
    subset.resize(n);
    std::iota(subset.begin(), subset.end(), 0);
  }
  std::vector<Vec3> candidates(subset.size());
  for (size_t i = 0; i < subset.size(); ++i) candidates[i] = cloud[subset[i]];
  const std::vector<int32_t> picked = geom::FarthestPointSample(candidates, m);

  std::vector<Vec3> points(m);
  std::vector<int32_t> source(m);
  for (size_t i = 0; i < m; ++i) {
    source[i] = subset[picked[i]];
    points[i] = cloud[source[i]];
  }
  Bones bones = MakeBones(std::move(points));
  bones.source = std::move(source);
  return bones;
}

nn::Tensor AlignedWindowSet::Coordinates(int64_t begin, int64_t end) const {
  Require(begin >= 0 && begin <= end && end <= count, "aligned windows: bad range");
  nn::Tensor t({(end - begin) * size, 3});
  const size_t base = static_cast<size_t>(begin * size);
  for (int64_t r = 0; r < t.dim(0); ++r) {
    for (int a = 0; a < 3; ++a) t.at(r, a) = static_cast<nn::Real>(coords[base + r][a]);
  }
  return t;
}

AlignedWindowSet BuildAlignedWindows(const geom::PointCloud& cloud,
                                     const geom::SpatialIndex& index,
                                     const Bones& bones, int64_t k) {
  Require(k >= 1 && static_cast<size_t>(k) <= cloud.size(),
          "build_aligned_windows: K=" + std::to_string(k) +
              " exceeds point count " + std::to_string(cloud.size()));
  Require(bones.density > 0.0, "build_aligned_windows: bones have no density");
  const geom::NeighborTable table = index.Knn(bones.points, static_cast<size_t>(k));
  AlignedWindowSet set;
  set.count = static_cast<int64_t>(bones.size());
  set.size = k;
  set.indices = table.indices;
  set.coords.resize(set.indices.size());
  const double d = bones.density;
  for (int64_t w = 0; w < set.count; ++w) {
    const Vec3& bone = bones.points[w];
    for (int64_t j = 0; j < k; ++j) {
      const size_t r = static_cast<size_t>(w * k + j);
      const Vec3& p = cloud[set.indices[r]];
      for (int a = 0; a < 3; ++a) set.coords[r][a] = (p[a] - bone[a]) / d;
    }
  }
  return set;
}

AlignedWindowSet BuildAlignedWindows(const geom::PointCloud& cloud,
                                     const Bones& bones, int64_t k) {
  const geom::SpatialIndex index(cloud);
  return BuildAlignedWindows(cloud, index, bones, k);
}

std::vector<int32_t> IntraWindowNeighbors(const AlignedWindowSet& windows,
                                          int64_t begin, int64_t end,
                                          int64_t k_m) {
  const int64_t size = windows.size;
  Require(k_m >= 1 && k_m <= size, "intra-window neighbors: k_m outside [1, K]");
  Require(begin >= 0 && begin <= end && end <= windows.count,
          "intra-window neighbors: bad range");
  std::vector<int32_t> out(static_cast<size_t>((end - begin) * size * k_m));
  ParallelFor(static_cast<size_t>(end - begin), 1, [&](size_t lo, size_t hi) {
    std::vector<std::pair<double, int32_t>> cand(static_cast<size_t>(size));
    for (size_t w = lo; w < hi; ++w) {
      const Vec3* pts = windows.coords.data() + (begin + static_cast<int64_t>(w)) * size;
      for (int64_t i = 0; i < size; ++i) {
        for (int64_t j = 0; j < size; ++j) {
          cand[j] = {geom::SquaredDistance(pts[i], pts[j]), static_cast<int32_t>(j)};
        }
        std::partial_sort(cand.begin(), cand.begin() + k_m, cand.end());
        int32_t* dst = out.data() + (w * size + i) * k_m;
        const auto offset = static_cast<int32_t>(w * size);
        for (int64_t j = 0; j < k_m; ++j) dst[j] = offset + cand[j].second;
      }
    }
  });
  return out;
}

AwdsNetwork::AwdsNetwork(nn::ModelWeights& weights, const AwdsConfig& config)
    : config_(config),
      embed_(weights, "awds.embed", {3, config.embed_hidden, config.channels}) {
  Require(config.blocks >= 0 && config.intra_neighbors >= 1,
          "awds: invalid configuration");
  for (int64_t l = 0; l < config.blocks; ++l) {
    blocks_.emplace_back(weights, "awds.attn." + std::to_string(l), config.channels);
  }
}

void AwdsNetwork::Initialize(Rng& rng) {
  embed_.mlp().Initialize(rng);
  for (auto& block : blocks_) block.Initialize(rng);
}

int64_t AwdsNetwork::effective_neighbors(int64_t window_size) const {
  return std::min(config_.intra_neighbors, window_size);
}

nn::Var AwdsNetwork::Forward(const nn::Var& coords, std::span<const int32_t> intra,
                             int64_t window_size) const {
  const int64_t k_m = effective_neighbors(window_size);
  Require(coords.value().cols() == 3 && coords.value().rows() % window_size == 0,
          "awds: coordinates must be [W * K, 3]");
  Require(static_cast<int64_t>(intra.size()) == coords.value().rows() * k_m,
          "awds: intra-window neighbor table has the wrong size");
  nn::Var f = embed_.ForwardShared(coords, intra, k_m);
  // Aligned coordinates are already relative to the window center.
  for (const auto& block : blocks_) f = block.Forward(f, coords, window_size);
  return nn::SegmentMax(f, window_size);
}

nn::Var AwdsNetwork::Forward(const AlignedWindowSet& windows, int64_t begin,
                             int64_t end) const {
  const std::vector<int32_t> intra =
      IntraWindowNeighbors(windows, begin, end, effective_neighbors(windows.size));
  return Forward(nn::Constant(windows.Coordinates(begin, end)), intra, windows.size);
}

size_t BoneCount(size_t n, size_t k) {
  Require(k >= 1, "window size must be positive");
  return std::max<size_t>(2, 2 * n / k);
}

AwdsOutput AwdsEncode(const geom::PointCloud& cloud, int64_t k,
                      const AwdsNetwork& network, uint64_t seed) {
  Require(k >= 1 && static_cast<size_t>(k) <= cloud.size(),
          "awds: K=" + std::to_string(k) + " exceeds point count " +
              std::to_string(cloud.size()));
  AwdsOutput out;
  out.bones = SampleBones(cloud, BoneCount(cloud.size(), static_cast<size_t>(k)), seed);
  out.windows = BuildAlignedWindows(cloud, out.bones, k);
  out.features = network.Forward(out.windows, 0, out.windows.count).value();
  return out;
}

}  // namespace pointsoup::awds
