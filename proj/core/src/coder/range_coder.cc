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

#include "pointsoup/coder/range_coder.h"

#include <string>

#include "pointsoup/base/error.h"

namespace pointsoup::coder {
namespace {

constexpr uint64_t kTop = uint64_t{1} << 56;
constexpr uint64_t kBottom = uint64_t{1} << 48;
constexpr uint64_t kWindowMask = kTop - 1;
constexpr uint64_t kLowMask = kBottom - 1;
constexpr int kWindowBytes = 7;

}  // namespace

RangeEncoder::RangeEncoder() : range_(kWindowMask) {}

void RangeEncoder::ShiftLow() {
  if (low_ < (uint64_t{0xFF} << 48) || low_ >= kTop) {
    const auto carry = static_cast<uint8_t>(low_ >> 56);
    uint8_t byte = cache_;
    do {
      if (first_) {
        first_ = false;
      } else {
        out_.push_back(static_cast<uint8_t>(byte + carry));
      }
      byte = 0xFF;
    } while (--pending_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 48);
  }
  ++pending_;
  low_ = (low_ & kLowMask) << 8;
}

void RangeEncoder::Encode(uint32_t cum, uint32_t freq) {
  Require(freq >= 1 && cum + freq <= kTotalFrequency,
          "range coder: interval outside the frequency total");
  const uint64_t step = range_ >> kFrequencyBits;
  low_ += step * cum;
  range_ = step * freq;
  while (range_ < kBottom) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::EncodeBits(uint32_t value, int bits) {
  Require(bits >= 1 && bits <= kFrequencyBits && value < (1u << bits),
          "range coder: raw bits out of range");
  const int shift = kFrequencyBits - bits;
  Encode(value << shift, 1u << shift);
}

void RangeEncoder::EncodeBit(int bit, uint32_t p0) {
  if (bit == 0) {
    Encode(0, p0);
  } else {
    Encode(p0, kTotalFrequency - p0);
  }
}

Bytes RangeEncoder::Finish() {
  // Pick the value in [low, low + range) with the most trailing zero bits;
  // those bytes need not be stored.
  for (int k = 56; k >= 48; --k) {
    const uint64_t unit = uint64_t{1} << k;
    const uint64_t v = (low_ + unit - 1) & ~(unit - 1);
    if (v - low_ < range_) {
      low_ = v;
      break;
    }
  }
  for (int i = 0; i <= kWindowBytes; ++i) ShiftLow();
  while (!out_.empty() && out_.back() == 0) out_.pop_back();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> stream)
    : in_(stream), range_(kWindowMask) {
  for (int i = 0; i < kWindowBytes; ++i) code_ = (code_ << 8) | NextByte();
}

uint8_t RangeDecoder::NextByte() {
  const size_t p = pos_++;
  return p < in_.size() ? in_[p] : 0;
}

uint32_t RangeDecoder::PeekFrequency() {
  step_ = range_ >> kFrequencyBits;
  const uint64_t target = code_ / step_;
  if (target >= kTotalFrequency) {
    Fail(ErrorCode::kFormat, "corrupt entropy-coded stream at byte " +
                                 std::to_string(pos_));
  }
  return static_cast<uint32_t>(target);
}

void RangeDecoder::Consume(uint32_t cum, uint32_t freq) {
  code_ -= step_ * cum;
  range_ = step_ * freq;
  if (code_ >= range_) {
    Fail(ErrorCode::kFormat, "corrupt entropy-coded stream at byte " +
                                 std::to_string(pos_));
  }
  while (range_ < kBottom) {
    code_ = (code_ << 8) | NextByte();
    range_ <<= 8;
  }
}

uint32_t RangeDecoder::DecodeBits(int bits) {
  const int shift = kFrequencyBits - bits;
  const uint32_t v = PeekFrequency() >> shift;
  Consume(v << shift, 1u << shift);
  return v;
}

int RangeDecoder::DecodeBit(uint32_t p0) {
  if (PeekFrequency() < p0) {
    Consume(0, p0);
    return 0;
  }
  Consume(p0, kTotalFrequency - p0);
  return 1;
}

}  // namespace pointsoup::coder
