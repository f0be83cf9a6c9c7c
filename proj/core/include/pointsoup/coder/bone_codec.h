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

#ifndef POINTSOUP_CODER_BONE_CODEC_H_
#define POINTSOUP_CODER_BONE_CODEC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pointsoup/base/bytes.h"
#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::coder {

// Identifier written to frame headers for the Morton/delta bone codec.
inline constexpr uint8_t kMortonDeltaBoneCodec = 1;

// Lossless coder for integer-grid bone points. Points are sorted in Morton
// order, each axis is delta coded against the previous point, and deltas are
// binarized (zero flag, sign, Exp-Golomb magnitude) under adaptive binary
// contexts.
//
// Stream layout: count u32 | bit-depth u8 | range-coded payload.
struct BoneStream {
  Bytes bytes;
  // order[i] is the input index of the i-th decoded point.
  std::vector<int32_t> order;
};

// Throws kInvalidArgument for coordinates off the [0, 2^bit_depth) grid.
BoneStream EncodeBones(std::span<const geom::Vec3> bones, int bit_depth = 10);

// Returns the bones in Morton order. Throws kFormat on a corrupt stream.
std::vector<geom::Vec3> DecodeBones(std::span<const uint8_t> stream);

}  // namespace pointsoup::coder

#endif  // POINTSOUP_CODER_BONE_CODEC_H_
