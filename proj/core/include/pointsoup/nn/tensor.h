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

#ifndef POINTSOUP_NN_TENSOR_H_
#define POINTSOUP_NN_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace pointsoup::nn {

// Network arithmetic is 32-bit. The double configuration exists for
// finite-difference gradient checking and is never used by the codec.
#if defined(POINTSOUP_REAL_DOUBLE)
using Real = double;
#else
using Real = float;
#endif

// Storage is 64-byte aligned. Vectorized reductions peel up to the first
// aligned element, so a fixed alignment keeps their summation order, and
// therefore every result bit, independent of where the allocator put a buffer.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, size_t) { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

// Dense row-major tensor. Most kernels view it as a matrix of
// rows() = product of leading dimensions and cols() = trailing dimension.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape, Real fill = 0);
  Tensor(std::vector<int64_t> shape, std::vector<Real> data);

  static Tensor Zeros(int64_t rows, int64_t cols) { return Tensor({rows, cols}); }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(size_t i) const { return shape_[i]; }
  size_t rank() const { return shape_.size(); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  int64_t rows() const;
  int64_t cols() const { return shape_.empty() ? 1 : shape_.back(); }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }

  Real& at(int64_t r, int64_t c) { return data_[r * cols() + c]; }
  Real at(int64_t r, int64_t c) const { return data_[r * cols() + c]; }
  Real& operator[](int64_t i) { return data_[i]; }
  Real operator[](int64_t i) const { return data_[i]; }

  // Reinterprets the data with a new shape of equal element count.
  void Reshape(std::vector<int64_t> shape);
  void Fill(Real v);
  bool AllFinite() const;
  std::string ShapeString() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<int64_t> shape_;
  std::vector<Real, AlignedAllocator<Real>> data_;
};

}  // namespace pointsoup::nn

#endif  // POINTSOUP_NN_TENSOR_H_
