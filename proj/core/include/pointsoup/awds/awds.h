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

#ifndef POINTSOUP_AWDS_AWDS_H_
#define POINTSOUP_AWDS_AWDS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pointsoup/base/random.h"
#include "pointsoup/geom/point_cloud.h"
#include "pointsoup/geom/spatial_index.h"
#include "pointsoup/nn/autograd.h"
#include "pointsoup/nn/layers.h"
#include "pointsoup/nn/weights.h"

namespace pointsoup::awds {

using geom::Vec3;

// Skeleton points plus their density (mean nearest-neighbor distance).
struct Bones {
  std::vector<Vec3> points;
  double density = 0.0;
  // Indices of the bones in the source cloud; empty for decoded bones.
  std::vector<int32_t> source;

  size_t size() const { return points.size(); }
};

// Wraps bone coordinates and computes their density. Needs >= 2 points.
Bones MakeBones(std::vector<Vec3> points);

// Random subsample to min(N, rps_factor * m) points, then farthest point
// sampling down to m. Throws if m > N or m < 2.
Bones SampleBones(const geom::PointCloud& cloud, size_t m, uint64_t seed,
                  size_t rps_factor = 16);

// Per-bone K-nearest windows of the input cloud, shifted so the bone sits
// at the origin and scaled by 1 / density.
struct AlignedWindowSet {
  int64_t count = 0;  // windows
  int64_t size = 0;   // points per window
  std::vector<int32_t> indices;  // [count * size] into the cloud
  std::vector<Vec3> coords;      // [count * size] aligned coordinates

  nn::Tensor Coordinates(int64_t begin, int64_t end) const;
};

AlignedWindowSet BuildAlignedWindows(const geom::PointCloud& cloud,
                                     const geom::SpatialIndex& index,
                                     const Bones& bones, int64_t k);
AlignedWindowSet BuildAlignedWindows(const geom::PointCloud& cloud,
                                     const Bones& bones, int64_t k);

// For windows [begin, end) of `windows`, the k_m nearest rows of every row
// within its own window, as row indices local to the batch (window w' of
// the batch occupies rows w' * size .. (w' + 1) * size - 1).
std::vector<int32_t> IntraWindowNeighbors(const AlignedWindowSet& windows,
                                          int64_t begin, int64_t end,
                                          int64_t k_m);

struct AwdsConfig {
  int64_t channels = 128;
  int64_t embed_hidden = 64;
  int64_t intra_neighbors = 16;
  int64_t blocks = 2;
};

// Window aggregation network: mini-embedding GraphConv over intra-window
// neighborhoods, attention blocks, then a channelwise max over the window.
class AwdsNetwork {
 public:
  AwdsNetwork() = default;
  AwdsNetwork(nn::ModelWeights& weights, const AwdsConfig& config);

  void Initialize(Rng& rng);

  // coords [W * K, 3]; intra from IntraWindowNeighbors with
  // k_m = effective_neighbors(K). Returns [W, C].
  nn::Var Forward(const nn::Var& coords, std::span<const int32_t> intra,
                  int64_t window_size) const;

  // Convenience over windows [begin, end) of a window set.
  nn::Var Forward(const AlignedWindowSet& windows, int64_t begin,
                  int64_t end) const;

  int64_t effective_neighbors(int64_t window_size) const;
  const AwdsConfig& config() const { return config_; }
  nn::GraphConv& embedding() { return embed_; }
  std::vector<nn::AttentionBlock>& blocks() { return blocks_; }

 private:
  AwdsConfig config_;
  nn::GraphConv embed_;
  std::vector<nn::AttentionBlock> blocks_;
};

// M = max(2, floor(2N / K)).
size_t BoneCount(size_t n, size_t k);

struct AwdsOutput {
  Bones bones;
  AlignedWindowSet windows;
  nn::Tensor features;  // [M, C]
};

// Bone sampling, window construction and aggregation in one call.
AwdsOutput AwdsEncode(const geom::PointCloud& cloud, int64_t k,
                      const AwdsNetwork& network, uint64_t seed);

}  // namespace pointsoup::awds

#endif  // POINTSOUP_AWDS_AWDS_H_
