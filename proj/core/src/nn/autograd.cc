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

#include "pointsoup/nn/autograd.h"

#include "pointsoup/base/error.h"

namespace pointsoup::nn {
namespace {

thread_local Tape* current_tape = nullptr;

}  // namespace

Tensor& Node::GradBuffer() {
  if (grad.numel() != value.numel() || grad.shape() != value.shape()) {
    grad = Tensor(value.shape());
  }
  return grad;
}

Tape::Tape() : previous_(current_tape) { current_tape = this; }

Tape::~Tape() { current_tape = previous_; }

Tape* Tape::Current() { return current_tape; }

void Tape::Record(const std::shared_ptr<Node>& node) {
  node->tape = this;
  nodes_.push_back(node);
}

void Tape::MixDecision(uint64_t value) {
  signature_ ^= value + 0x9E3779B97F4A7C15ull + (signature_ << 6) + (signature_ >> 2);
}

void Tape::Backward(const Var& loss) {
  Require(static_cast<bool>(loss), "backward on an empty value");
  if (nodes_.empty() || loss.node()->tape != this) {
    Fail(ErrorCode::kInvalidArgument,
         "backward called without a recorded forward pass");
  }
  Require(loss.value().numel() == 1, "backward requires a scalar loss");
  loss.node()->GradBuffer()[0] = 1;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& node = **it;
    if (node.grad.numel() == 0 || !node.backward) continue;
    node.backward(node.grad);
  }
  for (auto& node : nodes_) {
    if (node->grad.numel() && !node->grad.AllFinite()) {
      Fail(ErrorCode::kNumeric, "non-finite gradient in backward pass");
    }
  }
  nodes_.clear();
}

}  // namespace pointsoup::nn
