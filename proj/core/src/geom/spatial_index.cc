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

#include "pointsoup/geom/spatial_index.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "pointsoup/base/error.h"
#include "pointsoup/base/parallel.h"

namespace pointsoup::geom {
namespace {

constexpr uint32_t kLeafSize = 16;

double BoxSquaredDistance(const Bounds& box, const Vec3& q) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d) {
    double e = 0.0;
    if (q[d] < box.min[d]) {
      e = box.min[d] - q[d];
    } else if (q[d] > box.max[d]) {
      e = q[d] - box.max[d];
    }
    s += e * e;
  }
  return s;
}

// Max-heap on (squared distance, index): the top is the current worst.
using Candidate = std::pair<double, int32_t>;

}  // namespace

SpatialIndex::SpatialIndex(const PointCloud& cloud)
    : points_(cloud.points().begin(), cloud.points().end()) {
  Require(!points_.empty(), "cannot build a spatial index over an empty cloud");
  Require(points_.size() < std::numeric_limits<int32_t>::max(),
          "point cloud too large for 32-bit indices");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  Build(0, static_cast<uint32_t>(points_.size()));
}

int32_t SpatialIndex::Build(uint32_t begin, uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.box = {points_[order_[begin]], points_[order_[begin]]};
  for (uint32_t i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int d = 0; d < 3; ++d) {
      node.box.min[d] = std::min(node.box.min[d], p[d]);
      node.box.max[d] = std::max(node.box.max[d], p[d]);
    }
  }
  const int32_t id = static_cast<int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  double widest = -1.0;
  for (int d = 0; d < 3; ++d) {
    const double w = node.box.max[d] - node.box.min[d];
    if (w > widest) {
      widest = w;
      axis = d;
    }
  }
  if (widest <= 0.0) return id;  // all points coincide; keep as one leaf

  const uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](uint32_t a, uint32_t b) {
                     const double pa = points_[a][axis];
                     const double pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const int32_t left = Build(begin, mid);
  const int32_t right = Build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void SpatialIndex::Query(const Vec3& q, size_t k, std::span<int32_t> indices,
                         std::span<double> squared_distances) const {
  Require(k >= 1 && k <= points_.size(),
          "k=" + std::to_string(k) + " must be in [1, " +
              std::to_string(points_.size()) + "]");
  std::vector<Candidate> heap;
  heap.reserve(k + 1);
  auto worse_than_top = [&](double d2) {
    return heap.size() == k && d2 > heap.front().first;
  };

  std::vector<int32_t> stack;
  stack.reserve(64);
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (worse_than_top(BoxSquaredDistance(node.box, q))) continue;
    if (node.left < 0) {
      for (uint32_t i = node.begin; i < node.end; ++i) {
        const int32_t idx = static_cast<int32_t>(order_[i]);
        const Candidate c{SquaredDistance(points_[idx], q), idx};
        if (heap.size() < k) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      continue;
    }
    const double dl = BoxSquaredDistance(nodes_[node.left].box, q);
    const double dr = BoxSquaredDistance(nodes_[node.right].box, q);
    // Push the farther child first so the nearer one is expanded next.
    if (dl <= dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort_heap(heap.begin(), heap.end());
  for (size_t j = 0; j < k; ++j) {
    indices[j] = heap[j].second;
    squared_distances[j] = heap[j].first;
  }
}

int32_t SpatialIndex::Nearest(const Vec3& q, double* squared_distance) const {
  int32_t idx;
  double d2;
  Query(q, 1, {&idx, 1}, {&d2, 1});
  if (squared_distance != nullptr) *squared_distance = d2;
  return idx;
}

NeighborTable SpatialIndex::Knn(std::span<const Vec3> queries,
                                size_t k) const {
  Require(k >= 1 && k <= points_.size(),
          "k=" + std::to_string(k) + " exceeds indexed point count " +
              std::to_string(points_.size()));
  NeighborTable table;
  table.rows = queries.size();
  table.cols = k;
  table.indices.resize(queries.size() * k);
  table.squared_distances.resize(queries.size() * k);
  ParallelFor(queries.size(), 256, [&](size_t b, size_t e) {
    for (size_t r = b; r < e; ++r) {
      Query(queries[r], k,
            std::span<int32_t>(table.indices).subspan(r * k, k),
            std::span<double>(table.squared_distances).subspan(r * k, k));
    }
  });
  return table;
}

NeighborTable Knn(const SpatialIndex& index, const PointCloud& queries,
                  size_t k) {
  return index.Knn(queries.points(), k);
}

}  // namespace pointsoup::geom
