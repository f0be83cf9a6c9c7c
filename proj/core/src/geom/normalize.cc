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

#include "pointsoup/geom/normalize.h"

#include <algorithm>
#include <cmath>

#include "pointsoup/base/error.h"

namespace pointsoup::geom {

Normalization FitNormalization(const PointCloud& cloud, int bit_depth) {
  Require(bit_depth >= 1 && bit_depth <= 21, "normalize: bit depth must be in [1, 21]");
  cloud.Validate();
  const Bounds b = cloud.ComputeBounds();
  double extent = 0.0;
  for (int a = 0; a < 3; ++a) extent = std::max(extent, b.max[a] - b.min[a]);
  Normalization n;
  n.offset = b.min;
  n.bit_depth = bit_depth;
  const double top = std::ldexp(1.0, bit_depth) - 1.0;
  n.scale = extent > 0.0 ? top / extent : 1.0;
  return n;
}

PointCloud Normalize(const PointCloud& cloud, const Normalization& n) {
  Require(n.scale > 0.0 && std::isfinite(n.scale), "normalize: scale must be positive");
  const double top = std::ldexp(1.0, n.bit_depth) - 1.0;
  std::vector<Vec3> pts(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      pts[i][a] = std::clamp(std::round((cloud[i][a] - n.offset[a]) * n.scale), 0.0, top);
    }
  }
  return PointCloud(std::move(pts));
}

PointCloud Denormalize(const PointCloud& cloud, const Normalization& n) {
  Require(n.scale > 0.0 && std::isfinite(n.scale), "denormalize: scale must be positive");
  std::vector<Vec3> pts(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) pts[i][a] = cloud[i][a] / n.scale + n.offset[a];
  }
  return PointCloud(std::move(pts));
}

}  // namespace pointsoup::geom
