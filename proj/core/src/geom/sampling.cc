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

#include "pointsoup/geom/sampling.h"

#include <limits>
#include <numeric>
#include <string>

#include "pointsoup/base/error.h"
#include "pointsoup/base/random.h"

namespace pointsoup::geom {

std::vector<int32_t> RandomSample(size_t n, size_t m, uint64_t seed) {
  Require(m >= 1, "sample size must be positive");
  Require(m <= n, "cannot sample " + std::to_string(m) + " of " +
                      std::to_string(n) + " points");
  std::vector<int32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (size_t i = 0; i < m; ++i) {
    const size_t j = i + rng.UniformInt(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  return idx;
}

std::vector<int32_t> FarthestPointSample(std::span<const Vec3> points,
                                         size_t m, size_t start) {
  const size_t n = points.size();
  Require(m >= 1, "sample size must be positive");
  Require(m <= n, "cannot sample " + std::to_string(m) + " of " +
                      std::to_string(n) + " points");
  Require(start < n, "start index out of range");

  // Structure-of-arrays so the distance update vectorizes.
  std::vector<double> xs(n), ys(n), zs(n);
  for (size_t i = 0; i < n; ++i) {
    xs[i] = points[i][0];
    ys[i] = points[i][1];
    zs[i] = points[i][2];
  }
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<uint8_t> chosen(n, 0);
  std::vector<int32_t> out;
  out.reserve(m);
  size_t current = start;
  for (size_t s = 0; s < m; ++s) {
    out.push_back(static_cast<int32_t>(current));
    chosen[current] = 1;
    if (s + 1 == m) break;
    const double cx = xs[current], cy = ys[current], cz = zs[current];
    for (size_t i = 0; i < n; ++i) {
      const double dx = xs[i] - cx, dy = ys[i] - cy, dz = zs[i] - cz;
      const double d2 = dx * dx + dy * dy + dz * dz;
      min_d2[i] = d2 < min_d2[i] ? d2 : min_d2[i];
    }
    double best = -1.0;
    size_t best_i = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!chosen[i] && min_d2[i] > best) {
        best = min_d2[i];
        best_i = i;
      }
    }
    current = best_i;
  }
  return out;
}

}  // namespace pointsoup::geom
