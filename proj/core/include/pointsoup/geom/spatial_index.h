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

#ifndef POINTSOUP_GEOM_SPATIAL_INDEX_H_
#define POINTSOUP_GEOM_SPATIAL_INDEX_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::geom {

// Q x K neighbor indices. Rows are ordered by ascending squared distance with
// ties broken by smaller point index, so every table is uniquely determined
// by its inputs.
struct NeighborTable {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<int32_t> indices;
  std::vector<double> squared_distances;

  int32_t at(size_t r, size_t c) const { return indices[r * cols + c]; }
  std::span<const int32_t> row(size_t r) const {
    return std::span<const int32_t>(indices).subspan(r * cols, cols);
  }
};

// Exact k-nearest-neighbor search over an immutable kd-tree. Safe to query
// concurrently. A query point that belongs to the cloud is its own neighbor.
class SpatialIndex {
 public:
  // Throws kInvalidArgument on an empty cloud.
  explicit SpatialIndex(const PointCloud& cloud);

  size_t size() const { return points_.size(); }
  const Vec3& point(size_t i) const { return points_[i]; }

  // Throws kInvalidArgument when k is zero or exceeds size().
  NeighborTable Knn(std::span<const Vec3> queries, size_t k) const;

  // Single-query form. Writes k entries to each output span.
  void Query(const Vec3& q, size_t k, std::span<int32_t> indices,
             std::span<double> squared_distances) const;

  // Nearest point (rank 0) for one query.
  int32_t Nearest(const Vec3& q, double* squared_distance) const;

 private:
  struct Node {
    Bounds box;
    uint32_t begin = 0;
    uint32_t end = 0;
    int32_t left = -1;
    int32_t right = -1;
  };

  int32_t Build(uint32_t begin, uint32_t end);

  std::vector<Vec3> points_;    // source order
  std::vector<uint32_t> order_; // leaf ranges index into this
  std::vector<Node> nodes_;
};

NeighborTable Knn(const SpatialIndex& index, const PointCloud& queries,
                  size_t k);

}  // namespace pointsoup::geom

#endif  // POINTSOUP_GEOM_SPATIAL_INDEX_H_
