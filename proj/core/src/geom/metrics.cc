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

#include "pointsoup/geom/metrics.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pointsoup/base/error.h"
#include "pointsoup/base/parallel.h"
#include "pointsoup/geom/spatial_index.h"

namespace pointsoup::geom {

double MeanNearestNeighborDistance(std::span<const Vec3> points) {
  Require(points.size() >= 2,
          "mean nearest-neighbor distance needs at least two points");
  const SpatialIndex index(PointCloud({points.begin(), points.end()}));
  std::vector<double> dist(points.size());
  ParallelFor(points.size(), 1024, [&](size_t b, size_t e) {
    int32_t idx[2];
    double d2[2];
    for (size_t i = b; i < e; ++i) {
      index.Query(points[i], 2, idx, d2);
      dist[i] = std::sqrt(idx[0] != static_cast<int32_t>(i) ? d2[0] : d2[1]);
    }
  });
  std::sort(dist.begin(), dist.end());
  double sum = 0.0;
  for (double d : dist) sum += d;
  return sum / static_cast<double>(points.size());
}

double DirectedMeanSquaredDistance(const PointCloud& a, const PointCloud& b) {
  Require(!a.empty() && !b.empty(), "distance between empty point clouds");
  const SpatialIndex index(b);
  std::vector<double> d2(a.size());
  ParallelFor(a.size(), 1024, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) index.Nearest(a[i], &d2[i]);
  });
  double sum = 0.0;
  for (double v : d2) sum += v;
  return sum / static_cast<double>(a.size());
}

double ChamferDistance(const PointCloud& a, const PointCloud& b) {
  return DirectedMeanSquaredDistance(a, b) + DirectedMeanSquaredDistance(b, a);
}

double D1Psnr(const PointCloud& a, const PointCloud& b, double peak) {
  Require(peak > 0.0, "PSNR peak must be positive");
  const double mse = 0.5 * (DirectedMeanSquaredDistance(a, b) +
                            DirectedMeanSquaredDistance(b, a));
  if (mse == 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(3.0 * peak * peak / mse);
}

}  // namespace pointsoup::geom
