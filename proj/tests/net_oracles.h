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

// Scalar reference evaluations of the learned sub-networks, in double
// precision with explicit loops over the stored parameter values.
#ifndef POINTSOUP_TESTS_NET_ORACLES_H_
#define POINTSOUP_TESTS_NET_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "oracles.h"
#include "pointsoup/nn/layers.h"
#include "pointsoup/nn/tensor.h"
#include "pointsoup/nn/weights.h"

namespace pointsoup::testing {

inline std::vector<double> Values(const nn::Tensor& t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

inline Mat ToMat(const nn::Tensor& t) {
  Mat m(t.rows(), t.cols());
  for (int64_t i = 0; i < t.numel(); ++i) m.v[i] = t[i];
  return m;
}

inline nn::Tensor ToTensor(const Mat& m) {
  nn::Tensor t({m.rows, m.cols});
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<nn::Real>(m.v[i]);
  return t;
}

// MLP whose layers are stored as <prefix>.w1, <prefix>.b1, ...
inline Mat MlpRef(const nn::ModelWeights& w, const std::string& prefix, Mat x) {
  for (int layer = 1;; ++layer) {
    const std::string n = std::to_string(layer);
    if (!w.Contains(prefix + ".w" + n)) break;
    const nn::Tensor& wt = w.Get(prefix + ".w" + n).value;
    x = Affine(x, Values(wt), Values(w.Get(prefix + ".b" + n).value), wt.dim(1));
    if (w.Contains(prefix + ".w" + std::to_string(layer + 1))) x = ReluM(std::move(x));
  }
  return x;
}

// Channelwise max over consecutive groups of k rows.
inline Mat GroupMaxRef(const Mat& x, int64_t k) {
  Mat y(x.rows / k, x.cols);
  for (int64_t g = 0; g < y.rows; ++g) {
    for (int64_t c = 0; c < x.cols; ++c) {
      double best = -std::numeric_limits<double>::infinity();
      for (int64_t j = 0; j < k; ++j) best = std::max(best, x.at(g * k + j, c));
      y.at(g, c) = best;
    }
  }
  return y;
}

// One attention block on a single window (rows = K, row 0 the center).
inline Mat AttentionRef(const nn::ModelWeights& w, const std::string& prefix, const Mat& f,
                        const Mat& rel) {
  const int64_t k = f.rows, c = f.cols;
  const Mat key = Affine(f, Values(w.Get(prefix + ".key.w").value),
                         Values(w.Get(prefix + ".key.b").value), c);
  const Mat val = Affine(f, Values(w.Get(prefix + ".value_proj.w").value),
                         Values(w.Get(prefix + ".value_proj.b").value), c);
  const Mat pos = MlpRef(w, prefix + ".pos", rel);
  Mat pre(k, c);
  for (int64_t i = 0; i < k; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      const double pem = pos.at(i, j), peb = pos.at(i, c + j);
      pre.at(i, j) = (key.at(i, j) - key.at(0, j)) * pem + peb;
    }
  }
  const Mat logits = MlpRef(w, prefix + ".attn", pre);
  Mat gated(k, c);
  for (int64_t j = 0; j < c; ++j) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int64_t i = 0; i < k; ++i) mx = std::max(mx, logits.at(i, j));
    double z = 0.0;
    for (int64_t i = 0; i < k; ++i) z += std::exp(logits.at(i, j) - mx);
    for (int64_t i = 0; i < k; ++i) {
      const double s = std::exp(logits.at(i, j) - mx) / z;
      gated.at(i, j) = (val.at(i, j) + pos.at(i, c + j)) * s;
    }
  }
  Mat out = MlpRef(w, prefix + ".value", gated);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += f.v[i];
  return out;
}

}  // namespace pointsoup::testing

#endif  // POINTSOUP_TESTS_NET_ORACLES_H_
