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

#ifndef POINTSOUP_CODER_RANGE_CODER_H_
#define POINTSOUP_CODER_RANGE_CODER_H_

#include <cstdint>
#include <span>

#include "pointsoup/base/bytes.h"

namespace pointsoup::coder {

// All models share a 16-bit total frequency.
inline constexpr int kFrequencyBits = 16;
inline constexpr uint32_t kTotalFrequency = 1u << kFrequencyBits;

// Byte-oriented range coder with a 56-bit window held in 64-bit registers.
// The range is kept in [2^48, 2^56), so truncating it to a 16-bit frequency
// grid costs at most 2^-32 relative per symbol. Carries out of the window are
// propagated through a one-byte cache plus a run of pending 0xFF bytes. The
// leading byte, which is always zero, is not emitted, and trailing zero bytes
// are trimmed: the decoder reads zeros past the end of the stream.
class RangeEncoder {
 public:
  RangeEncoder();

  // Codes the interval [cum, cum + freq) out of kTotalFrequency. freq >= 1.
  void Encode(uint32_t cum, uint32_t freq);

  // Codes `bits` (<= 16) raw bits with a uniform model.
  void EncodeBits(uint32_t value, int bits);

  // Codes one bit with probability p0 / 2^16 of being zero.
  void EncodeBit(int bit, uint32_t p0);

  // Flushes the coder and returns the stream. The encoder is spent after.
  Bytes Finish();

 private:
  void ShiftLow();

  uint64_t low_ = 0;
  uint64_t range_;
  uint8_t cache_ = 0;
  uint64_t pending_ = 1;  // cache byte plus pending 0xFF bytes
  bool first_ = true;
  Bytes out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> stream);

  // Target frequency of the next symbol, in [0, kTotalFrequency). Throws
  // kFormat when the stream is inconsistent.
  uint32_t PeekFrequency();

  // Removes the interval chosen after PeekFrequency.
  void Consume(uint32_t cum, uint32_t freq);

  uint32_t DecodeBits(int bits);
  int DecodeBit(uint32_t p0);

  // Bytes consumed so far, including implicit zero padding.
  size_t position() const { return pos_; }

 private:
  uint8_t NextByte();
  void Normalize();

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
  uint64_t code_ = 0;
  uint64_t range_;
  uint64_t step_ = 0;
};

}  // namespace pointsoup::coder

#endif  // POINTSOUP_CODER_RANGE_CODER_H_
