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

#ifndef POINTSOUP_GEOM_SAMPLING_H_
#define POINTSOUP_GEOM_SAMPLING_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::geom {

// m distinct indices drawn uniformly without replacement (partial
// Fisher-Yates). Reproducible from seed on every platform.
std::vector<int32_t> RandomSample(size_t n, size_t m, uint64_t seed);

// Greedy max-min selection starting at `start`. Each pick maximizes the
// distance to the already chosen set, ties going to the smaller index.
std::vector<int32_t> FarthestPointSample(std::span<const Vec3> points,
                                         size_t m, size_t start = 0);

inline std::vector<int32_t> FarthestPointSample(const PointCloud& cloud,
                                                size_t m, size_t start = 0) {
  return FarthestPointSample(cloud.points(), m, start);
}

}  // namespace pointsoup::geom

#endif  // POINTSOUP_GEOM_SAMPLING_H_
