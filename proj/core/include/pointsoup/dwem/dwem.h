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

#ifndef POINTSOUP_DWEM_DWEM_H_
#define POINTSOUP_DWEM_DWEM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pointsoup/awds/awds.h"
#include "pointsoup/base/random.h"
#include "pointsoup/coder/symbol_model.h"
#include "pointsoup/nn/autograd.h"
#include "pointsoup/nn/layers.h"
#include "pointsoup/nn/weights.h"

namespace pointsoup::dwem {

// Each bone's k nearest bones (self first) with coordinates relative to the
// bone, divided by the bone density.
struct DilatedWindows {
  int64_t count = 0;
  int64_t size = 0;
  std::vector<int32_t> indices;   // [count * size] into the bones
  std::vector<geom::Vec3> rel;    // [count * size]

  nn::Tensor Relative(int64_t begin, int64_t end) const;
};

// k is clamped to the bone count.
DilatedWindows BuildDilatedWindows(const awds::Bones& bones, int64_t k);

struct LaplaceVars {
  nn::Var mu;     // [M, c]
  nn::Var scale;  // [M, c], > 0
};

inline constexpr double kScaleFloor = 1e-9;

struct DwemConfig {
  int64_t channels = 128;
  int64_t compact_channels = 16;
  int64_t conv_hidden = 64;
  int64_t conv_channels = 128;
  int64_t head_hidden = 128;
};

class DwemNetwork {
 public:
  DwemNetwork() = default;
  DwemNetwork(nn::ModelWeights& weights, const DwemConfig& config);

  void Initialize(Rng& rng);

  // [M, C] -> [M, c] and back; plain affine maps.
  nn::Var Compact(const nn::Var& features) const;
  nn::Var Stretch(const nn::Var& compact) const;

  // Laplacian parameters for windows [begin, end) of the dilated set.
  LaplaceVars EstimateParams(const DilatedWindows& dw, int64_t begin,
                             int64_t end) const;
  LaplaceVars EstimateParams(const DilatedWindows& dw) const {
    return EstimateParams(dw, 0, dw.count);
  }

  const DwemConfig& config() const { return config_; }
  nn::Parameter& compact_weight() { return *compact_w_; }
  nn::Parameter& compact_bias() { return *compact_b_; }
  nn::Parameter& stretch_weight() { return *stretch_w_; }
  nn::Parameter& stretch_bias() { return *stretch_b_; }
  nn::GraphConv& conv() { return conv_; }
  nn::Mlp& head() { return head_; }

 private:
  DwemConfig config_;
  nn::Parameter* compact_w_ = nullptr;
  nn::Parameter* compact_b_ = nullptr;
  nn::Parameter* stretch_w_ = nullptr;
  nn::Parameter* stretch_b_ = nullptr;
  nn::GraphConv conv_;
  nn::Mlp head_;
};

// Rounds half away from zero. Throws kNumeric on non-finite values or
// values outside the int32 range.
std::vector<int32_t> Quantize(const nn::Tensor& f);

// Uniform noise in [-1/2, 1/2) drawn from `rng`, same shape as `like`.
nn::Tensor UniformNoise(const nn::Tensor& like, Rng& rng);

// f + U(-1/2, 1/2) noise.
nn::Var AddNoise(const nn::Var& f, Rng& rng);

// Bin probability of integer x under the Laplacian (mu, b) convolved with
// U(-1/2, 1/2).
double Likelihood(double x, double mu, double b);

// Elementwise likelihoods for a symbol matrix.
std::vector<double> Likelihoods(std::span<const int32_t> q, const nn::Tensor& mu,
                                const nn::Tensor& scale);

// -(1/N) * sum log2 max(P, floor), bits per input point.
double Rate(std::span<const int32_t> q, const nn::Tensor& mu,
            const nn::Tensor& scale, size_t n);

// Integer coding models for every entry of (mu, scale), row-major.
std::vector<coder::IntegerModel> CodingModels(const nn::Tensor& mu,
                                              const nn::Tensor& scale);

}  // namespace pointsoup::dwem

#endif  // POINTSOUP_DWEM_DWEM_H_
