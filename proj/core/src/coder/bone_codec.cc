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

#include "pointsoup/coder/bone_codec.h"

#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "pointsoup/base/error.h"
#include "pointsoup/coder/range_coder.h"
#include "pointsoup/geom/morton.h"

namespace pointsoup::coder {
namespace {

constexpr int kMaxBitDepth = 21;
constexpr int kMaxExponent = kMaxBitDepth + 1;
constexpr uint32_t kMaxBones = 1u << 26;
constexpr int kAdaptShift = 5;

struct BitModel {
  uint32_t p0 = kTotalFrequency / 2;

  void Update(int bit) {
    if (bit == 0) {
      p0 += (kTotalFrequency - p0) >> kAdaptShift;
    } else {
      p0 -= p0 >> kAdaptShift;
    }
  }
};

struct AxisContexts {
  BitModel zero;
  BitModel sign;
  std::array<BitModel, kMaxExponent + 1> prefix;
  std::array<std::array<BitModel, kMaxExponent>, kMaxExponent + 1> suffix;
};

class DeltaWriter {
 public:
  void Put(int axis, int64_t delta) {
    AxisContexts& ctx = contexts_[axis];
    Bit(ctx.zero, delta == 0 ? 0 : 1);
    if (delta == 0) return;
    Bit(ctx.sign, delta < 0 ? 1 : 0);
    // Exp-Golomb on |delta|, which is >= 1.
    const auto mag = static_cast<uint64_t>(delta < 0 ? -delta : delta);
    const int n = std::bit_width(mag) - 1;
    for (int i = 0; i < n; ++i) Bit(ctx.prefix[i], 1);
    Bit(ctx.prefix[n], 0);
    for (int i = n - 1; i >= 0; --i) Bit(ctx.suffix[n][i], (mag >> i) & 1);
  }

  Bytes Finish() { return enc_.Finish(); }

 private:
  void Bit(BitModel& m, int bit) {
    enc_.EncodeBit(bit, m.p0);
    m.Update(bit);
  }

  RangeEncoder enc_;
  std::array<AxisContexts, 3> contexts_{};
};

class DeltaReader {
 public:
  explicit DeltaReader(std::span<const uint8_t> payload) : dec_(payload) {}

  int64_t Get(int axis) {
    AxisContexts& ctx = contexts_[axis];
    if (Bit(ctx.zero) == 0) return 0;
    const bool negative = Bit(ctx.sign) == 1;
    int n = 0;
    while (Bit(ctx.prefix[n]) == 1) {
      if (++n > kMaxExponent - 1) {
        Fail(ErrorCode::kFormat, "bone stream: delta exponent out of range at byte " +
                                     std::to_string(dec_.position()));
      }
    }
    uint64_t mag = 1;
    for (int i = n - 1; i >= 0; --i) mag = (mag << 1) | Bit(ctx.suffix[n][i]);
    const auto value = static_cast<int64_t>(mag);
    return negative ? -value : value;
  }

 private:
  int Bit(BitModel& m) {
    const int bit = dec_.DecodeBit(m.p0);
    m.Update(bit);
    return bit;
  }

  RangeDecoder dec_;
  std::array<AxisContexts, 3> contexts_{};
};

}  // namespace

BoneStream EncodeBones(std::span<const geom::Vec3> bones, int bit_depth) {
  Require(bit_depth >= 1 && bit_depth <= kMaxBitDepth,
          "bone codec: bit depth must be in [1, 21]");
  Require(bones.size() <= kMaxBones, "bone codec: too many bones");
  const double limit = std::ldexp(1.0, bit_depth);
  for (size_t i = 0; i < bones.size(); ++i) {
    for (double v : bones[i]) {
      if (!(v >= 0.0 && v < limit && v == std::floor(v))) {
        Fail(ErrorCode::kInvalidArgument,
             "bone codec: bone " + std::to_string(i) + " is off the " +
                 std::to_string(bit_depth) + "-bit integer grid");
      }
    }
  }
  BoneStream stream;
  stream.order = geom::MortonOrder(bones);
  ByteWriter header(&stream.bytes);
  header.U32(static_cast<uint32_t>(bones.size()));
  header.U8(static_cast<uint8_t>(bit_depth));

  DeltaWriter writer;
  std::array<int64_t, 3> prev{0, 0, 0};
  for (int32_t idx : stream.order) {
    for (int a = 0; a < 3; ++a) {
      const auto v = static_cast<int64_t>(bones[idx][a]);
      writer.Put(a, v - prev[a]);
      prev[a] = v;
    }
  }
  const Bytes payload = writer.Finish();
  stream.bytes.insert(stream.bytes.end(), payload.begin(), payload.end());
  return stream;
}

std::vector<geom::Vec3> DecodeBones(std::span<const uint8_t> stream) {
  ByteReader header(stream);
  const uint32_t count = header.U32();
  const int bit_depth = header.U8();
  if (bit_depth < 1 || bit_depth > kMaxBitDepth) {
    Fail(ErrorCode::kFormat, "bone stream: invalid bit depth " + std::to_string(bit_depth));
  }
  if (count > kMaxBones) {
    Fail(ErrorCode::kFormat, "bone stream: implausible bone count " + std::to_string(count));
  }
  const int64_t limit = int64_t{1} << bit_depth;
  DeltaReader reader(stream.subspan(header.position()));
  std::vector<geom::Vec3> bones(count);
  std::array<int64_t, 3> prev{0, 0, 0};
  uint64_t prev_code = 0;
  for (uint32_t i = 0; i < count; ++i) {
    for (int a = 0; a < 3; ++a) {
      const int64_t v = prev[a] + reader.Get(a);
      if (v < 0 || v >= limit) {
        Fail(ErrorCode::kFormat, "bone stream: decoded coordinate off grid at bone " +
                                     std::to_string(i));
      }
      prev[a] = v;
      bones[i][a] = static_cast<double>(v);
    }
    const uint64_t code = geom::MortonEncode(static_cast<uint32_t>(prev[0]),
                                             static_cast<uint32_t>(prev[1]),
                                             static_cast<uint32_t>(prev[2]));
    if (code < prev_code) {
      Fail(ErrorCode::kFormat, "bone stream: bones out of Morton order at bone " +
                                   std::to_string(i));
    }
    prev_code = code;
  }
  return bones;
}

}  // namespace pointsoup::coder
