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

#ifndef POINTSOUP_NN_LAYERS_H_
#define POINTSOUP_NN_LAYERS_H_

#include <string>
#include <vector>

#include "pointsoup/base/random.h"
#include "pointsoup/nn/ops.h"
#include "pointsoup/nn/weights.h"

namespace pointsoup::nn {

// Affine chain with ReLU between layers and an identity output.
// widths = {in, hidden..., out}; parameters are named prefix.w{i}/prefix.b{i}.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ModelWeights& weights, const std::string& prefix,
      std::vector<int64_t> widths);

  Var Forward(const Var& x) const;

  // He-uniform for layers feeding a ReLU, fan-in uniform for the output
  // layer; biases start at zero.
  void Initialize(Rng& rng);
  void ZeroOutputLayer();

  const std::vector<int64_t>& widths() const { return widths_; }
  int64_t in_features() const { return widths_.front(); }
  int64_t out_features() const { return widths_.back(); }
  std::vector<Parameter*> parameters() const;

 private:
  std::vector<int64_t> widths_;
  std::vector<Parameter*> w_;
  std::vector<Parameter*> b_;
};

// GraphConv(.) = MaxPool(MLP(.)) over groups of k consecutive rows.
class GraphConv {
 public:
  GraphConv() = default;
  GraphConv(ModelWeights& weights, const std::string& prefix,
            std::vector<int64_t> widths)
      : mlp_(weights, prefix, std::move(widths)) {}

  // groups: [G * k, Cin] -> [G, Cout].
  Var Forward(const Var& groups, int64_t k) const {
    return SegmentMax(mlp_.Forward(groups), k);
  }

  // Neighborhood form where the MLP input depends only on the neighbor:
  // per-point features [P, Cin], neighbor index [G * k] -> [G, Cout].
  // The MLP runs once per point instead of once per (group, neighbor).
  Var ForwardShared(const Var& points, std::span<const int32_t> neighbors,
                    int64_t k) const {
    return GatherMax(mlp_.Forward(points), neighbors, k);
  }

  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }

 private:
  Mlp mlp_;
};

// Subtraction vector attention over windows of K rows whose first row is the
// window center:
//   Q   = row 0 of the key projection, repeated K times
//   Pem, Peb = split(pos_mlp(rel_coords))
//   S   = softmax_window(attn_mlp((K - Q) * Pem + Peb))
//   out = F + value_mlp((V + Peb) * S)
// where * is elementwise. Shape-preserving: [W * K, C] -> [W * K, C].
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(ModelWeights& weights, const std::string& prefix,
                 int64_t channels);

  Var Forward(const Var& feats, const Var& rel_coords,
              int64_t window_size) const;

  void Initialize(Rng& rng);

  Parameter& key_weight() const { return *wk_; }
  Mlp& value_mlp() { return value_mlp_; }
  Mlp& attention_mlp() { return attn_mlp_; }
  Mlp& position_mlp() { return pos_mlp_; }

 private:
  int64_t channels_ = 0;
  Parameter* wk_ = nullptr;
  Parameter* bk_ = nullptr;
  Parameter* wv_ = nullptr;
  Parameter* bv_ = nullptr;
  Mlp pos_mlp_;
  Mlp attn_mlp_;
  Mlp value_mlp_;
};

}  // namespace pointsoup::nn

#endif  // POINTSOUP_NN_LAYERS_H_
