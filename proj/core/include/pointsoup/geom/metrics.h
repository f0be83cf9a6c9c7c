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

#ifndef POINTSOUP_GEOM_METRICS_H_
#define POINTSOUP_GEOM_METRICS_H_

#include <limits>
#include <span>

#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::geom {

// Mean distance from each point to its nearest *other* point (by index).
// The per-point distances are summed in sorted order, so the result depends
// only on the multiset of points and is bit-identical under reordering.
// Throws kInvalidArgument when fewer than two points are given.
double MeanNearestNeighborDistance(std::span<const Vec3> points);

inline double MeanNearestNeighborDistance(const PointCloud& cloud) {
  return MeanNearestNeighborDistance(cloud.points());
}

// Mean over a of the squared distance to the nearest point of b.
double DirectedMeanSquaredDistance(const PointCloud& a, const PointCloud& b);

// Symmetric squared-distance chamfer: directed(a, b) + directed(b, a).
double ChamferDistance(const PointCloud& a, const PointCloud& b);

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

// Point-to-point geometry PSNR, 10 log10(3 peak^2 / MSE), where MSE is the
// mean of the two directed mean squared distances. Identical clouds give
// kInfinitePsnr.
double D1Psnr(const PointCloud& a, const PointCloud& b, double peak = 1023.0);

}  // namespace pointsoup::geom

#endif  // POINTSOUP_GEOM_METRICS_H_
