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

#include "pointsoup/nn/adam.h"

#include <cmath>

#include "pointsoup/base/error.h"

namespace pointsoup::nn {

Adam::Adam(const ModelWeights& weights, AdamOptions options)
    : options_(options) {
  for (const auto& p : weights.parameters()) {
    m_.emplace_back(p->value.numel(), 0.0);
    v_.emplace_back(p->value.numel(), 0.0);
  }
}

void Adam::Step(ModelWeights& weights) {
  const auto& params = weights.parameters();
  Require(params.size() == m_.size(), "optimizer does not match the weights");
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor& value = params[p]->value;
    const Tensor& grad = params[p]->grad;
    std::vector<double>& m = m_[p];
    std::vector<double>& v = v_[p];
    for (int64_t i = 0; i < value.numel(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      value[i] -= static_cast<Real>(options_.learning_rate * m_hat /
                                    (std::sqrt(v_hat) + options_.epsilon));
    }
  }
}

}  // namespace pointsoup::nn
