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

#include "pointsoup/nn/layers.h"

#include <cmath>

#include "pointsoup/base/error.h"

namespace pointsoup::nn {
namespace {

void UniformFill(Tensor& t, double bound, Rng& rng) {
  for (Real& v : t.values()) v = static_cast<Real>(rng.Uniform(-bound, bound));
}

}  // namespace

Mlp::Mlp(ModelWeights& weights, const std::string& prefix,
         std::vector<int64_t> widths)
    : widths_(std::move(widths)) {
  Require(widths_.size() >= 2, "MLP '" + prefix + "' needs at least one layer");
  for (int64_t w : widths_) Require(w > 0, "MLP '" + prefix + "' has a zero width");
  for (size_t i = 0; i + 1 < widths_.size(); ++i) {
    const std::string n = std::to_string(i + 1);
    w_.push_back(&weights.Add(prefix + ".w" + n, {widths_[i], widths_[i + 1]}));
    b_.push_back(&weights.Add(prefix + ".b" + n, {widths_[i + 1]}));
  }
}

Var Mlp::Forward(const Var& x) const {
  Var h = x;
  for (size_t i = 0; i < w_.size(); ++i) {
    h = Linear(h, *w_[i], b_[i]);
    if (i + 1 < w_.size()) h = Relu(h);
  }
  return h;
}

void Mlp::Initialize(Rng& rng) {
  for (size_t i = 0; i < w_.size(); ++i) {
    const double fan_in = static_cast<double>(widths_[i]);
    const bool hidden = i + 1 < w_.size();
    UniformFill(w_[i]->value, hidden ? std::sqrt(6.0 / fan_in) : 1.0 / std::sqrt(fan_in), rng);
    b_[i]->value.Fill(0);
  }
}

void Mlp::ZeroOutputLayer() {
  w_.back()->value.Fill(0);
  b_.back()->value.Fill(0);
}

std::vector<Parameter*> Mlp::parameters() const {
  std::vector<Parameter*> out;
  for (size_t i = 0; i < w_.size(); ++i) {
    out.push_back(w_[i]);
    out.push_back(b_[i]);
  }
  return out;
}

AttentionBlock::AttentionBlock(ModelWeights& weights, const std::string& prefix,
                               int64_t channels)
    : channels_(channels),
      wk_(&weights.Add(prefix + ".key.w", {channels, channels})),
      bk_(&weights.Add(prefix + ".key.b", {channels})),
      wv_(&weights.Add(prefix + ".value_proj.w", {channels, channels})),
      bv_(&weights.Add(prefix + ".value_proj.b", {channels})),
      pos_mlp_(weights, prefix + ".pos", {3, channels, 2 * channels}),
      attn_mlp_(weights, prefix + ".attn", {channels, channels, channels}),
      value_mlp_(weights, prefix + ".value", {channels, channels, channels}) {}

void AttentionBlock::Initialize(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(channels_));
  UniformFill(wk_->value, bound, rng);
  UniformFill(wv_->value, bound, rng);
  bk_->value.Fill(0);
  bv_->value.Fill(0);
  pos_mlp_.Initialize(rng);
  attn_mlp_.Initialize(rng);
  value_mlp_.Initialize(rng);
}

Var AttentionBlock::Forward(const Var& feats, const Var& rel_coords,
                            int64_t window_size) const {
  const int64_t rows = feats.value().rows();
  Require(window_size >= 1 && rows % window_size == 0,
          "attention: rows not divisible by window size");
  Require(feats.value().cols() == channels_, "attention: channel mismatch");
  Require(rel_coords.value().rows() == rows && rel_coords.value().cols() == 3,
          "attention: relative coordinates must be [rows, 3]");

  const Var key = Linear(feats, *wk_, bk_);
  const Var value = Linear(feats, *wv_, bv_);
  std::vector<int32_t> centers(rows);
  for (int64_t r = 0; r < rows; ++r) {
    centers[r] = static_cast<int32_t>(r - r % window_size);
  }
  const Var query = GatherRows(key, centers);
  const Var pe = pos_mlp_.Forward(rel_coords);
  const Var pem = SliceCols(pe, 0, channels_);
  const Var peb = SliceCols(pe, channels_, 2 * channels_);
  const Var logits = attn_mlp_.Forward(Add(Mul(Sub(key, query), pem), peb));
  const Var weights = SegmentSoftmax(logits, window_size);
  return Add(feats, value_mlp_.Forward(Mul(Add(value, peb), weights)));
}

}  // namespace pointsoup::nn
