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

#ifndef POINTSOUP_NN_OPS_H_
#define POINTSOUP_NN_OPS_H_

#include <cstdint>
#include <span>

#include "pointsoup/geom/point_cloud.h"
#include "pointsoup/geom/spatial_index.h"
#include "pointsoup/nn/autograd.h"
#include "pointsoup/nn/weights.h"

// Differentiable kernels. Matrices are row-major [rows, cols]; "groups" are
// consecutive runs of rows of equal length.
namespace pointsoup::nn {

Var Constant(Tensor value);

// x [n, a] * w [a, b] + bias [b]. `bias` may be null.
Var Linear(const Var& x, Parameter& w, Parameter* bias);

Var Relu(const Var& x);
Var Softplus(const Var& x);
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Scale(const Var& x, double s);
Var AddConstant(const Var& x, Real c);

// out[i] = x[index[i]].
Var GatherRows(const Var& x, std::span<const int32_t> index);

// out[g] = channelwise max over x[index[g * k + j]], j < k. Equivalent to
// MaxPool(GatherRows(x, index)) without materializing the gathered rows.
Var GatherMax(const Var& x, std::span<const int32_t> index, int64_t k);

// Channelwise max over consecutive groups of k rows.
Var SegmentMax(const Var& x, int64_t k);

// Channelwise softmax over consecutive groups of k rows.
Var SegmentSoftmax(const Var& x, int64_t k);

Var SliceCols(const Var& x, int64_t begin, int64_t end);
Var ConcatCols(const Var& a, const Var& b);
Var Reshape(const Var& x, int64_t rows, int64_t cols);

// Sum of all elements, as a [1] tensor.
Var Sum(const Var& x);

// Symmetric squared chamfer distance between predicted points [P, 3] and a
// fixed target cloud: mean_p min_t |p - t|^2 + mean_t min_p |t - p|^2.
Var ChamferLoss(const Var& pred, const geom::PointCloud& target,
                const geom::SpatialIndex& target_index);

inline constexpr double kLikelihoodFloor = 1e-9;

// Probability mass of the integer bin [x - 1/2, x + 1/2] under a Laplacian
// with location mu and scale b, i.e. the Laplacian convolved with U(-1/2, 1/2)
// evaluated at x. Computed in tail form to avoid cancellation.
double LaplaceBinMass(double x, double mu, double b);

// Total information content -sum log2 max(P(x), floor) in bits, where P is
// LaplaceBinMass. All three inputs share one shape.
Var LaplaceBits(const Var& x, const Var& mu, const Var& scale);

}  // namespace pointsoup::nn

#endif  // POINTSOUP_NN_OPS_H_
