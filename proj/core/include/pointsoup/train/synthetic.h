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

#ifndef POINTSOUP_TRAIN_SYNTHETIC_H_
#define POINTSOUP_TRAIN_SYNTHETIC_H_

#include <cstdint>
#include <string>

#include "pointsoup/base/random.h"
#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::train {

enum class Shape { kSphere, kBox, kPlaneWithHoles, kSwissRoll };

const char* ShapeName(Shape shape);

// Parametric surface to sample. Sizes are in arbitrary units; the result is
// normalized onto the grid, so only proportions matter.
struct SyntheticSpec {
  Shape shape = Shape::kSphere;
  size_t points = 2048;
  double radius = 1.0;                     // sphere
  double extent[3] = {1.0, 1.0, 1.0};      // box sides
  int holes = 3;                           // plane with holes
  double hole_radius = 0.12;
  double roll_turns = 1.5;                 // swiss roll
  double roll_width = 2.0;
  bool rotate = true;                      // random orientation
  int bit_depth = 10;
};

// Uniform surface samples normalized onto the integer grid. Throws for
// zero-area specs.
geom::PointCloud GenerateSynthetic(const SyntheticSpec& spec, uint64_t seed);

// Random shape with randomized proportions and a point count in
// [min_points, max_points].
SyntheticSpec RandomSpec(Rng& rng, size_t min_points, size_t max_points);

}  // namespace pointsoup::train

#endif  // POINTSOUP_TRAIN_SYNTHETIC_H_
