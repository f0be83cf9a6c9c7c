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

#ifndef POINTSOUP_GEOM_MORTON_H_
#define POINTSOUP_GEOM_MORTON_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::geom {

// Spreads the low 21 bits of v so that bit i lands at bit 3i.
inline uint64_t SpreadBits3(uint64_t v) {
  v &= 0x1fffff;
  v = (v | v << 32) & 0x1f00000000ffffull;
  v = (v | v << 16) & 0x1f0000ff0000ffull;
  v = (v | v << 8) & 0x100f00f00f00f00full;
  v = (v | v << 4) & 0x10c30c30c30c30c3ull;
  v = (v | v << 2) & 0x1249249249249249ull;
  return v;
}

// Interleaves (x, y, z) with x in the least significant position.
inline uint64_t MortonEncode(uint32_t x, uint32_t y, uint32_t z) {
  return SpreadBits3(x) | (SpreadBits3(y) << 1) | (SpreadBits3(z) << 2);
}

// Permutation that sorts integer-grid points by Morton code (stable, so
// coincident points keep their relative order).
std::vector<int32_t> MortonOrder(std::span<const Vec3> points);

}  // namespace pointsoup::geom

#endif  // POINTSOUP_GEOM_MORTON_H_
