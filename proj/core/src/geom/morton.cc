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

#include "pointsoup/geom/morton.h"

#include <algorithm>
#include <numeric>

#include "pointsoup/base/error.h"

namespace pointsoup::geom {

std::vector<int32_t> MortonOrder(std::span<const Vec3> points) {
  std::vector<uint64_t> codes(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    uint32_t c[3];
    for (int d = 0; d < 3; ++d) {
      const double v = points[i][d];
      Require(v >= 0.0 && v < 2097152.0 && v == static_cast<double>(static_cast<uint32_t>(v)),
              "Morton order requires non-negative integer coordinates");
      c[d] = static_cast<uint32_t>(v);
    }
    codes[i] = MortonEncode(c[0], c[1], c[2]);
  }
  std::vector<int32_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int32_t a, int32_t b) { return codes[a] < codes[b]; });
  return order;
}

}  // namespace pointsoup::geom
