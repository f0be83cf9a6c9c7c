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

#include "pointsoup/dwem/dwem.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pointsoup/base/error.h"
#include "pointsoup/base/parallel.h"
#include "pointsoup/geom/spatial_index.h"
#include "pointsoup/nn/ops.h"

namespace pointsoup::dwem {

nn::Tensor DilatedWindows::Relative(int64_t begin, int64_t end) const {
  Require(begin >= 0 && begin <= end && end <= count, "dilated windows: bad range");
  nn::Tensor t({(end - begin) * size, 3});
  const size_t base = static_cast<size_t>(begin * size);
  for (int64_t r = 0; r < t.dim(0); ++r) {
    for (int a = 0; a < 3; ++a) t.at(r, a) = static_cast<nn::Real>(rel[base + r][a]);
  }
  return t;
}

DilatedWindows BuildDilatedWindows(const awds::Bones& bones, int64_t k) {
  Require(bones.size() >= 1, "dilated windows: no bones");
  Require(k >= 1, "dilated windows: k must be positive");
  Require(bones.density > 0.0, "dilated windows: bones have no density");
  k = std::min<int64_t>(k, static_cast<int64_t>(bones.size()));
  const geom::PointCloud cloud(bones.points);
  const geom::SpatialIndex index(cloud);
  const geom::NeighborTable table = index.Knn(bones.points, static_cast<size_t>(k));
  DilatedWindows dw;
  dw.count = static_cast<int64_t>(bones.size());
  dw.size = k;
  dw.indices = table.indices;
  dw.rel.resize(dw.indices.size());
  for (int64_t w = 0; w < dw.count; ++w) {
    const geom::Vec3& center = bones.points[w];
    for (int64_t j = 0; j < k; ++j) {
      const size_t r = static_cast<size_t>(w * k + j);
      const geom::Vec3& p = bones.points[dw.indices[r]];
      for (int a = 0; a < 3; ++a) dw.rel[r][a] = (p[a] - center[a]) / bones.density;
    }
  }
  return dw;
}

DwemNetwork::DwemNetwork(nn::ModelWeights& weights, const DwemConfig& config)
    : config_(config),
      compact_w_(&weights.Add("dwem.compact.w", {config.channels, config.compact_channels})),
      compact_b_(&weights.Add("dwem.compact.b", {config.compact_channels})),
      stretch_w_(&weights.Add("dwem.stretch.w", {config.compact_channels, config.channels})),
      stretch_b_(&weights.Add("dwem.stretch.b", {config.channels})),
      conv_(weights, "dwem.conv", {3, config.conv_hidden, config.conv_channels}),
      head_(weights, "dwem.head",
            {config.conv_channels, config.head_hidden, 2 * config.compact_channels}) {}

void DwemNetwork::Initialize(Rng& rng) {
  const auto fill = [&](nn::Parameter& p, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (nn::Real& v : p.value.values()) v = static_cast<nn::Real>(rng.Uniform(-bound, bound));
  };
  fill(*compact_w_, static_cast<double>(config_.channels));
  compact_b_->value.Fill(0);
  fill(*stretch_w_, static_cast<double>(config_.compact_channels));
  stretch_b_->value.Fill(0);
  conv_.mlp().Initialize(rng);
  head_.Initialize(rng);
}

nn::Var DwemNetwork::Compact(const nn::Var& features) const {
  return nn::Linear(features, *compact_w_, compact_b_);
}

nn::Var DwemNetwork::Stretch(const nn::Var& compact) const {
  return nn::Linear(compact, *stretch_w_, stretch_b_);
}

LaplaceVars DwemNetwork::EstimateParams(const DilatedWindows& dw, int64_t begin,
                                        int64_t end) const {
  const nn::Var pooled = conv_.Forward(nn::Constant(dw.Relative(begin, end)), dw.size);
  const nn::Var raw = head_.Forward(pooled);
  const int64_t c = config_.compact_channels;
  LaplaceVars out;
  out.mu = nn::SliceCols(raw, 0, c);
  out.scale = nn::AddConstant(nn::Softplus(nn::SliceCols(raw, c, 2 * c)),
                              static_cast<nn::Real>(kScaleFloor));
  return out;
}

std::vector<int32_t> Quantize(const nn::Tensor& f) {
  std::vector<int32_t> q(static_cast<size_t>(f.numel()));
  constexpr double kLimit = 2147483647.0;
  for (int64_t i = 0; i < f.numel(); ++i) {
    const double r = std::round(static_cast<double>(f[i]));
    if (!std::isfinite(r) || std::fabs(r) > kLimit) {
      Fail(ErrorCode::kNumeric, "quantize: feature value " + std::to_string(f[i]) +
                                    " is not representable");
    }
    q[i] = static_cast<int32_t>(r);
  }
  return q;
}

nn::Tensor UniformNoise(const nn::Tensor& like, Rng& rng) {
  nn::Tensor noise(like.shape());
  for (nn::Real& v : noise.values()) v = static_cast<nn::Real>(rng.Uniform() - 0.5);
  return noise;
}

nn::Var AddNoise(const nn::Var& f, Rng& rng) {
  return nn::Add(f, nn::Constant(UniformNoise(f.value(), rng)));
}

double Likelihood(double x, double mu, double b) {
  return nn::LaplaceBinMass(x, mu, b);
}

std::vector<double> Likelihoods(std::span<const int32_t> q, const nn::Tensor& mu,
                                const nn::Tensor& scale) {
  Require(static_cast<int64_t>(q.size()) == mu.numel() && mu.shape() == scale.shape(),
          "likelihood: shape mismatch");
  std::vector<double> p(q.size());
  for (size_t i = 0; i < q.size(); ++i) p[i] = Likelihood(q[i], mu[i], scale[i]);
  return p;
}

double Rate(std::span<const int32_t> q, const nn::Tensor& mu, const nn::Tensor& scale,
            size_t n) {
  Require(n >= 1, "rate: point count must be positive");
  double bits = 0.0;
  for (double p : Likelihoods(q, mu, scale)) {
    bits -= std::log2(std::max(p, nn::kLikelihoodFloor));
  }
  return bits / static_cast<double>(n);
}

std::vector<coder::IntegerModel> CodingModels(const nn::Tensor& mu,
                                              const nn::Tensor& scale) {
  Require(mu.shape() == scale.shape(), "coding models: shape mismatch");
  std::vector<coder::IntegerModel> models(static_cast<size_t>(mu.numel()));
  ParallelFor(models.size(), 256, [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) models[i] = coder::MakeLaplaceModel(mu[i], scale[i]);
  });
  return models;
}

}  // namespace pointsoup::dwem
