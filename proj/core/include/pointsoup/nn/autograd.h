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

#ifndef POINTSOUP_NN_AUTOGRAD_H_
#define POINTSOUP_NN_AUTOGRAD_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "pointsoup/nn/tensor.h"

namespace pointsoup::nn {

class Tape;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  const Tape* tape = nullptr;
  std::function<void(const Tensor& grad)> backward;

  Tensor& GradBuffer();
};

// Handle to a value in the computation. Cheap to copy.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::shared_ptr<Node>& node() const { return node_; }
  explicit operator bool() const { return node_ != nullptr; }

 private:
  std::shared_ptr<Node> node_;
};

// Records differentiable operations executed on this thread while alive.
// Without an active tape every op runs in inference mode and keeps nothing
// for the backward pass.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* Current();

  void Record(const std::shared_ptr<Node>& node);

  // Reverse-mode sweep from a scalar loss. Parameter gradients accumulate
  // into Parameter::grad. Throws if the loss was not recorded on this tape
  // and kNumeric if any gradient is non-finite.
  void Backward(const Var& loss);

  // Discrete branch decisions (ReLU masks, max-pool winners, nearest
  // neighbors) are hashed here when tracking is on, so callers can tell
  // whether two forward passes followed the same piecewise-smooth branch.
  void set_track_decisions(bool on) { track_decisions_ = on; }
  bool track_decisions() const { return track_decisions_; }
  void MixDecision(uint64_t value);
  uint64_t decision_signature() const { return signature_; }

  size_t size() const { return nodes_.size(); }

 private:
  std::vector<std::shared_ptr<Node>> nodes_;
  Tape* previous_ = nullptr;
  bool track_decisions_ = false;
  uint64_t signature_ = 0xcbf29ce484222325ull;
};

}  // namespace pointsoup::nn

#endif  // POINTSOUP_NN_AUTOGRAD_H_
