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

#ifndef POINTSOUP_CODER_SYMBOL_MODEL_H_
#define POINTSOUP_CODER_SYMBOL_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pointsoup/base/bytes.h"
#include "pointsoup/coder/range_coder.h"

namespace pointsoup::coder {

// Integer CDF over n symbols with total kTotalFrequency. Every symbol has
// frequency >= 1, so the CDF is strictly increasing.
class SymbolModel {
 public:
  SymbolModel() = default;
  explicit SymbolModel(std::vector<uint32_t> cdf);

  size_t size() const { return cdf_.size() - 1; }
  uint32_t cumulative(size_t s) const { return cdf_[s]; }
  uint32_t frequency(size_t s) const { return cdf_[s + 1] - cdf_[s]; }
  const std::vector<uint32_t>& cdf() const { return cdf_; }

  // Symbol s with cdf[s] <= target < cdf[s + 1].
  size_t Lookup(uint32_t target) const;

 private:
  std::vector<uint32_t> cdf_;
};

// Quantizes a pmf (non-negative, any positive sum) to 16-bit frequencies:
// floor of the scaled mass, largest-remainder distribution of the leftover
// (ties to the smaller index), then every zero bucket is raised to 1 by
// taking one unit from the current largest bucket (ties to the smaller
// index). Throws on an empty pmf, a non-positive sum, or more symbols than
// kTotalFrequency.
SymbolModel QuantizeCdf(std::span<const double> pmf);

inline constexpr int32_t kAlphabetMin = -(1 << 15);
inline constexpr int32_t kAlphabetMax = (1 << 15) - 1;

// Model for integer symbols in [lo, hi] plus an escape symbol (the last
// entry of the CDF). Values outside [lo, hi] are coded as the escape symbol
// followed by the raw 32-bit little-endian two's-complement value.
struct IntegerModel {
  int32_t lo = 0;
  int32_t hi = 0;
  SymbolModel cdf;  // hi - lo + 2 symbols

  size_t escape() const { return cdf.size() - 1; }
};

// Discretized Laplacian (location mu, scale b) over a window centred on
// round(mu) wide enough that the tails beyond it fall below 2^-17; the tail
// mass is assigned to the escape symbol.
IntegerModel MakeLaplaceModel(double mu, double b);

void EncodeInteger(RangeEncoder& enc, const IntegerModel& model, int32_t value);
int32_t DecodeInteger(RangeDecoder& dec, const IntegerModel& model);

// Codes symbols[i] under models[i].
Bytes EncodeSymbols(std::span<const int32_t> symbols,
                    std::span<const IntegerModel> models);

// Decodes models.size() symbols. Throws kFormat with the byte position on a
// corrupt stream.
std::vector<int32_t> DecodeSymbols(std::span<const uint8_t> stream,
                                   std::span<const IntegerModel> models);

// Ideal code length of `value` under `model`, in bits (escape included).
double CodeLengthBits(const IntegerModel& model, int32_t value);

}  // namespace pointsoup::coder

#endif  // POINTSOUP_CODER_SYMBOL_MODEL_H_
