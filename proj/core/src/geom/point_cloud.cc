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

#include "pointsoup/geom/point_cloud.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "pointsoup/base/error.h"

namespace pointsoup::geom {

void PointCloud::Validate() const {
  Require(!points_.empty(), "point cloud is empty");
  for (size_t i = 0; i < points_.size(); ++i) {
    for (double v : points_[i]) {
      if (!std::isfinite(v)) {
        Fail(ErrorCode::kNumeric,
             "non-finite coordinate at point " + std::to_string(i));
      }
    }
  }
}

bool PointCloud::OnGrid(int bit_depth) const {
  const double hi = std::ldexp(1.0, bit_depth) - 1.0;
  return std::all_of(points_.begin(), points_.end(), [hi](const Vec3& p) {
    return std::all_of(p.begin(), p.end(), [hi](double v) {
      return v >= 0.0 && v <= hi && std::floor(v) == v;
    });
  });
}

Bounds PointCloud::ComputeBounds() const {
  Require(!points_.empty(), "bounds of an empty point cloud");
  Bounds b{points_[0], points_[0]};
  for (const Vec3& p : points_) {
    for (int d = 0; d < 3; ++d) {
      b.min[d] = std::min(b.min[d], p[d]);
      b.max[d] = std::max(b.max[d], p[d]);
    }
  }
  return b;
}

}  // namespace pointsoup::geom
