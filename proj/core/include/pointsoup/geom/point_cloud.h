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

#ifndef POINTSOUP_GEOM_POINT_CLOUD_H_
#define POINTSOUP_GEOM_POINT_CLOUD_H_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pointsoup::geom {

using Vec3 = std::array<double, 3>;

inline double SquaredDistance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

struct Bounds {
  Vec3 min;
  Vec3 max;
};

// N x 3 coordinate matrix. Codec input frames live on the integer 10-bit grid
// [0, 1023] but are stored as doubles so the same type carries decoded output.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {}

  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const Vec3& operator[](size_t i) const { return points_[i]; }
  Vec3& operator[](size_t i) { return points_[i]; }

  std::span<const Vec3> points() const { return points_; }
  std::vector<Vec3>& mutable_points() { return points_; }

  // Throws kInvalidArgument when empty and kNumeric on non-finite values.
  void Validate() const;

  // True when every coordinate is an integer in [0, 2^bit_depth - 1].
  bool OnGrid(int bit_depth) const;

  Bounds ComputeBounds() const;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::vector<Vec3> points_;
};

}  // namespace pointsoup::geom

#endif  // POINTSOUP_GEOM_POINT_CLOUD_H_
