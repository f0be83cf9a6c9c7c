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

#include "pointsoup/coder/symbol_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "pointsoup/base/error.h"

namespace pointsoup::coder {
namespace {

// Laplacian mass on [lo, hi], written so both tails stay accurate.
double LaplaceMass(double lo, double hi, double mu, double b) {
  if (lo >= mu) {
    return 0.5 * (std::exp(-(lo - mu) / b) - std::exp(-(hi - mu) / b));
  }
  if (hi <= mu) {
    return 0.5 * (std::exp((hi - mu) / b) - std::exp((lo - mu) / b));
  }
  return 1.0 - 0.5 * std::exp((lo - mu) / b) - 0.5 * std::exp(-(hi - mu) / b);
}

// ln(2^17): tail beyond this many scales holds less than 2^-17 of the mass.
constexpr double kTailScales = 11.783;
constexpr int32_t kMinHalfWidth = 2;
constexpr int32_t kMaxHalfWidth = 4096;

}  // namespace

SymbolModel::SymbolModel(std::vector<uint32_t> cdf) : cdf_(std::move(cdf)) {
  Require(cdf_.size() >= 2 && cdf_.front() == 0 &&
              cdf_.back() == kTotalFrequency,
          "symbol model: CDF must start at 0 and end at 2^16");
  for (size_t i = 1; i < cdf_.size(); ++i) {
    Require(cdf_[i] > cdf_[i - 1], "symbol model: CDF must be strictly increasing");
  }
}

size_t SymbolModel::Lookup(uint32_t target) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  return static_cast<size_t>(it - cdf_.begin()) - 1;
}

SymbolModel QuantizeCdf(std::span<const double> pmf) {
  const size_t n = pmf.size();
  Require(n >= 1, "quantize_cdf: empty pmf");
  Require(n <= kTotalFrequency, "quantize_cdf: more symbols than frequency total");
  double sum = 0.0;
  for (double p : pmf) {
    Require(std::isfinite(p) && p >= 0.0, "quantize_cdf: pmf entries must be finite and >= 0");
    sum += p;
  }
  Require(sum > 0.0, "quantize_cdf: pmf has zero mass");

  std::vector<uint32_t> freq(n);
  std::vector<double> remainder(n);
  uint64_t assigned = 0;
  for (size_t i = 0; i < n; ++i) {
    const double scaled = pmf[i] / sum * kTotalFrequency;
    const double whole = std::floor(scaled);
    freq[i] = static_cast<uint32_t>(whole);
    remainder[i] = scaled - whole;
    assigned += freq[i];
  }
  if (assigned > kTotalFrequency) {
    // Rounding pushed the floors over the total; trim from the largest.
    while (assigned > kTotalFrequency) {
      const auto it = std::max_element(freq.begin(), freq.end());
      --*it;
      --assigned;
    }
  } else if (assigned < kTotalFrequency) {
    const size_t leftover = kTotalFrequency - assigned;
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    const auto by_remainder = [&](uint32_t a, uint32_t b) {
      return remainder[a] != remainder[b] ? remainder[a] > remainder[b] : a < b;
    };
    for (size_t given = 0; given < leftover;) {
      const size_t take = std::min(leftover - given, n);
      std::partial_sort(order.begin(), order.begin() + take, order.end(),
                        by_remainder);
      for (size_t j = 0; j < take; ++j) ++freq[order[j]];
      given += take;
    }
  }
  // Donors come off a heap ordered by (frequency desc, index asc), which is
  // the same choice as a first-maximum scan but O(log n) per zero bucket.
  using Entry = std::pair<uint32_t, int64_t>;  // (freq, -index)
  std::priority_queue<Entry> donors;
  for (size_t i = 0; i < n; ++i) {
    if (freq[i] != 0) donors.push({freq[i], -static_cast<int64_t>(i)});
  }
  for (size_t i = 0; i < n; ++i) {
    if (freq[i] != 0) continue;
    const size_t donor = static_cast<size_t>(-donors.top().second);
    donors.pop();
    --freq[donor];
    donors.push({freq[donor], -static_cast<int64_t>(donor)});
    freq[i] = 1;
    donors.push({1, -static_cast<int64_t>(i)});
  }
  std::vector<uint32_t> cdf(n + 1, 0);
  for (size_t i = 0; i < n; ++i) cdf[i + 1] = cdf[i] + freq[i];
  return SymbolModel(std::move(cdf));
}

IntegerModel MakeLaplaceModel(double mu, double b) {
  Require(std::isfinite(mu) && std::isfinite(b) && b > 0.0,
          "laplace model: need finite mu and b > 0");
  const double centre = std::clamp(std::round(mu), double{kAlphabetMin},
                                   double{kAlphabetMax});
  const double half = std::clamp(std::ceil(b * kTailScales) + 1.0,
                                 double{kMinHalfWidth}, double{kMaxHalfWidth});
  IntegerModel model;
  model.lo = static_cast<int32_t>(std::max(centre - half, double{kAlphabetMin}));
  model.hi = static_cast<int32_t>(std::min(centre + half, double{kAlphabetMax}));
  const size_t n = static_cast<size_t>(model.hi - model.lo) + 1;
  std::vector<double> pmf(n + 1);
  for (size_t i = 0; i < n; ++i) {
    const double x = model.lo + static_cast<double>(i);
    pmf[i] = LaplaceMass(x - 0.5, x + 0.5, mu, b);
  }
  const double lower = model.lo - 0.5;
  const double upper = model.hi + 0.5;
  const double below = lower < mu ? 0.5 * std::exp((lower - mu) / b)
                                  : 1.0 - 0.5 * std::exp(-(lower - mu) / b);
  const double above = upper > mu ? 0.5 * std::exp(-(upper - mu) / b)
                                  : 1.0 - 0.5 * std::exp((upper - mu) / b);
  pmf[n] = below + above;
  model.cdf = QuantizeCdf(pmf);
  return model;
}

void EncodeInteger(RangeEncoder& enc, const IntegerModel& model, int32_t value) {
  if (value >= model.lo && value <= model.hi) {
    const auto s = static_cast<size_t>(value - model.lo);
    enc.Encode(model.cdf.cumulative(s), model.cdf.frequency(s));
    return;
  }
  const size_t esc = model.escape();
  enc.Encode(model.cdf.cumulative(esc), model.cdf.frequency(esc));
  const auto raw = static_cast<uint32_t>(value);
  for (int i = 0; i < 4; ++i) enc.EncodeBits((raw >> (8 * i)) & 0xFF, 8);
}

int32_t DecodeInteger(RangeDecoder& dec, const IntegerModel& model) {
  const size_t s = model.cdf.Lookup(dec.PeekFrequency());
  dec.Consume(model.cdf.cumulative(s), model.cdf.frequency(s));
  if (s != model.escape()) return model.lo + static_cast<int32_t>(s);
  uint32_t raw = 0;
  for (int i = 0; i < 4; ++i) raw |= dec.DecodeBits(8) << (8 * i);
  return static_cast<int32_t>(raw);
}

Bytes EncodeSymbols(std::span<const int32_t> symbols,
                    std::span<const IntegerModel> models) {
  Require(symbols.size() == models.size(),
          "encode_symbols: symbol and model counts differ");
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) EncodeInteger(enc, models[i], symbols[i]);
  return enc.Finish();
}

std::vector<int32_t> DecodeSymbols(std::span<const uint8_t> stream,
                                   std::span<const IntegerModel> models) {
  RangeDecoder dec(stream);
  std::vector<int32_t> out(models.size());
  for (size_t i = 0; i < models.size(); ++i) out[i] = DecodeInteger(dec, models[i]);
  return out;
}

double CodeLengthBits(const IntegerModel& model, int32_t value) {
  const bool inside = value >= model.lo && value <= model.hi;
  const size_t s = inside ? static_cast<size_t>(value - model.lo) : model.escape();
  const double bits = kFrequencyBits - std::log2(double(model.cdf.frequency(s)));
  return inside ? bits : bits + 32.0;
}

}  // namespace pointsoup::coder
