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

#include "pointsoup/nn/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "pointsoup/base/error.h"

namespace pointsoup::nn {
namespace {

int64_t Product(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    Require(d >= 0, "negative tensor dimension");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape, Real fill)
    : shape_(std::move(shape)), data_(Product(shape_), fill) {}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<Real> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  Require(Product(shape_) == static_cast<int64_t>(data_.size()),
          "tensor data does not match shape " + ShapeString());
}

int64_t Tensor::rows() const {
  if (shape_.empty()) return 1;
  int64_t r = 1;
  for (size_t i = 0; i + 1 < shape_.size(); ++i) r *= shape_[i];
  return r;
}

void Tensor::Reshape(std::vector<int64_t> shape) {
  Require(Product(shape) == numel(), "reshape changes element count");
  shape_ = std::move(shape);
}

void Tensor::Fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](Real v) { return std::isfinite(v); });
}

std::string Tensor::ShapeString() const {
  std::string s = "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

}  // namespace pointsoup::nn
