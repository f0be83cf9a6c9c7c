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

#ifndef POINTSOUP_GEOM_NORMALIZE_H_
#define POINTSOUP_GEOM_NORMALIZE_H_

#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::geom {

// Uniform scale and offset onto the integer grid [0, 2^bit_depth - 1]:
//   grid = round((p - offset) * scale)
// The longest bounding-box side spans the whole grid.
struct Normalization {
  Vec3 offset{0.0, 0.0, 0.0};
  double scale = 1.0;
  int bit_depth = 10;
};

// Throws on an empty or non-finite cloud. A zero-extent cloud gets scale 1.
Normalization FitNormalization(const PointCloud& cloud, int bit_depth = 10);

PointCloud Normalize(const PointCloud& cloud, const Normalization& n);

// Maps grid coordinates back: p / scale + offset.
PointCloud Denormalize(const PointCloud& cloud, const Normalization& n);

}  // namespace pointsoup::geom

#endif  // POINTSOUP_GEOM_NORMALIZE_H_
