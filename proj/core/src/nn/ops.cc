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

#include "pointsoup/nn/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pointsoup/base/error.h"

namespace pointsoup::nn {
namespace {

using MatrixMap =
    Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatrixMap = Eigen::Map<
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowVectorMap = Eigen::Map<Eigen::Matrix<Real, 1, Eigen::Dynamic>>;
using ConstRowVectorMap = Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>;

ConstMatrixMap AsMatrix(const Tensor& t) {
  return ConstMatrixMap(t.data(), t.rows(), t.cols());
}
MatrixMap AsMatrix(Tensor& t) { return MatrixMap(t.data(), t.rows(), t.cols()); }

// Creates the output node. It joins the active tape only when some input
// needs a gradient.
std::shared_ptr<Node> MakeNode(Tensor value, bool needs_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  Tape* tape = Tape::Current();
  node->requires_grad = needs_grad && tape != nullptr;
  if (node->requires_grad) tape->Record(node);
  return node;
}

bool Tracking() {
  Tape* tape = Tape::Current();
  return tape != nullptr && tape->track_decisions();
}

void MixDecision(uint64_t v) { Tape::Current()->MixDecision(v); }

void CheckSameShape(const Var& a, const Var& b, const char* op) {
  if (a.value().shape() != b.value().shape()) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(op) + ": shape mismatch " + a.value().ShapeString() +
             " vs " + b.value().ShapeString());
  }
}

std::shared_ptr<std::vector<int32_t>> CopyIndex(std::span<const int32_t> index) {
  return std::make_shared<std::vector<int32_t>>(index.begin(), index.end());
}

}  // namespace

Var Constant(Tensor value) { return Var(MakeNode(std::move(value), false)); }

Var Linear(const Var& x, Parameter& w, Parameter* bias) {
  const Tensor& xv = x.value();
  const int64_t in = w.value.dim(0);
  const int64_t out = w.value.dim(1);
  if (xv.cols() != in) {
    Fail(ErrorCode::kInvalidArgument,
         "linear '" + w.name + "': input " + xv.ShapeString() +
             " does not match weight " + w.value.ShapeString());
  }
  std::vector<int64_t> shape = xv.shape();
  if (shape.empty()) shape = {1};
  shape.back() = out;
  Tensor y(shape);
  auto ym = AsMatrix(y);
  ym.noalias() = AsMatrix(xv) * AsMatrix(w.value);
  if (bias != nullptr) {
    ym.rowwise() += ConstRowVectorMap(bias->value.data(), out);
  }
  auto node = MakeNode(std::move(y), true);
  if (node->requires_grad) {
    auto xn = x.node();
    Parameter* wp = &w;
    node->backward = [xn, wp, bias](const Tensor& g) {
      auto gm = AsMatrix(g);
      AsMatrix(wp->grad).noalias() += AsMatrix(xn->value).transpose() * gm;
      if (bias != nullptr) {
        RowVectorMap(bias->grad.data(), bias->grad.numel()) += gm.colwise().sum();
      }
      if (xn->requires_grad) {
        AsMatrix(xn->GradBuffer()).noalias() += gm * AsMatrix(wp->value).transpose();
      }
    };
  }
  return Var(node);
}

Var Relu(const Var& x) {
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) y[i] = xv[i] > 0 ? xv[i] : Real(0);
  if (Tracking()) {
    uint64_t h = 0;
    for (int64_t i = 0; i < xv.numel(); ++i) {
      h = (h << 1) | (xv[i] > 0 ? 1u : 0u);
      if ((i & 63) == 63) {
        MixDecision(h);
        h = 0;
      }
    }
    MixDecision(h);
  }
  auto node = MakeNode(std::move(y), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    node->backward = [xn](const Tensor& g) {
      Tensor& gx = xn->GradBuffer();
      for (int64_t i = 0; i < g.numel(); ++i) {
        if (xn->value[i] > 0) gx[i] += g[i];
      }
    };
  }
  return Var(node);
}

Var Softplus(const Var& x) {
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (int64_t i = 0; i < xv.numel(); ++i) {
    const double v = xv[i];
    y[i] = static_cast<Real>(v > 0 ? v + std::log1p(std::exp(-v))
                                   : std::log1p(std::exp(v)));
  }
  auto node = MakeNode(std::move(y), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    node->backward = [xn](const Tensor& g) {
      Tensor& gx = xn->GradBuffer();
      for (int64_t i = 0; i < g.numel(); ++i) {
        const double v = xn->value[i];
        gx[i] += static_cast<Real>(g[i] / (1.0 + std::exp(-v)));
      }
    };
  }
  return Var(node);
}

Var Add(const Var& a, const Var& b) {
  CheckSameShape(a, b, "add");
  Tensor y = a.value();
  for (int64_t i = 0; i < y.numel(); ++i) y[i] += b.value()[i];
  auto node = MakeNode(std::move(y), a.requires_grad() || b.requires_grad());
  if (node->requires_grad) {
    auto an = a.node(), bn = b.node();
    node->backward = [an, bn](const Tensor& g) {
      for (auto* n : {an.get(), bn.get()}) {
        if (!n->requires_grad) continue;
        Tensor& gn = n->GradBuffer();
        for (int64_t i = 0; i < g.numel(); ++i) gn[i] += g[i];
      }
    };
  }
  return Var(node);
}

Var Sub(const Var& a, const Var& b) {
  CheckSameShape(a, b, "sub");
  Tensor y = a.value();
  for (int64_t i = 0; i < y.numel(); ++i) y[i] -= b.value()[i];
  auto node = MakeNode(std::move(y), a.requires_grad() || b.requires_grad());
  if (node->requires_grad) {
    auto an = a.node(), bn = b.node();
    node->backward = [an, bn](const Tensor& g) {
      if (an->requires_grad) {
        Tensor& ga = an->GradBuffer();
        for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
      }
      if (bn->requires_grad) {
        Tensor& gb = bn->GradBuffer();
        for (int64_t i = 0; i < g.numel(); ++i) gb[i] -= g[i];
      }
    };
  }
  return Var(node);
}

Var Mul(const Var& a, const Var& b) {
  CheckSameShape(a, b, "mul");
  Tensor y = a.value();
  for (int64_t i = 0; i < y.numel(); ++i) y[i] *= b.value()[i];
  auto node = MakeNode(std::move(y), a.requires_grad() || b.requires_grad());
  if (node->requires_grad) {
    auto an = a.node(), bn = b.node();
    node->backward = [an, bn](const Tensor& g) {
      if (an->requires_grad) {
        Tensor& ga = an->GradBuffer();
        for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * bn->value[i];
      }
      if (bn->requires_grad) {
        Tensor& gb = bn->GradBuffer();
        for (int64_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * an->value[i];
      }
    };
  }
  return Var(node);
}

Var Scale(const Var& x, double s) {
  Tensor y = x.value();
  const Real rs = static_cast<Real>(s);
  for (int64_t i = 0; i < y.numel(); ++i) y[i] *= rs;
  auto node = MakeNode(std::move(y), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    node->backward = [xn, rs](const Tensor& g) {
      Tensor& gx = xn->GradBuffer();
      for (int64_t i = 0; i < g.numel(); ++i) gx[i] += g[i] * rs;
    };
  }
  return Var(node);
}

Var AddConstant(const Var& x, Real c) {
  Tensor y = x.value();
  for (int64_t i = 0; i < y.numel(); ++i) y[i] += c;
  auto node = MakeNode(std::move(y), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    node->backward = [xn](const Tensor& g) {
      Tensor& gx = xn->GradBuffer();
      for (int64_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
    };
  }
  return Var(node);
}

Var GatherRows(const Var& x, std::span<const int32_t> index) {
  const Tensor& xv = x.value();
  const int64_t c = xv.cols();
  const int64_t n = xv.rows();
  Tensor y({static_cast<int64_t>(index.size()), c});
  for (size_t i = 0; i < index.size(); ++i) {
    const int64_t r = index[i];
    Require(r >= 0 && r < n, "gather index out of range");
    std::copy_n(xv.data() + r * c, c, y.data() + i * c);
  }
  auto node = MakeNode(std::move(y), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    auto idx = CopyIndex(index);
    node->backward = [xn, idx, c](const Tensor& g) {
      Tensor& gx = xn->GradBuffer();
      for (size_t i = 0; i < idx->size(); ++i) {
        Real* dst = gx.data() + (*idx)[i] * c;
        const Real* src = g.data() + i * c;
        for (int64_t j = 0; j < c; ++j) dst[j] += src[j];
      }
    };
  }
  return Var(node);
}

Var GatherMax(const Var& x, std::span<const int32_t> index, int64_t k) {
  Require(k >= 1 && index.size() % k == 0, "gather-max: bad group size");
  const Tensor& xv = x.value();
  const int64_t c = xv.cols();
  const int64_t n = xv.rows();
  const int64_t groups = static_cast<int64_t>(index.size()) / k;
  Tensor y({groups, c});
  auto winner = std::make_shared<std::vector<int32_t>>(groups * c);
  for (int64_t g = 0; g < groups; ++g) {
    Real* out = y.data() + g * c;
    int32_t* win = winner->data() + g * c;
    const int32_t first = index[g * k];
    Require(first >= 0 && first < n, "gather-max index out of range");
    std::copy_n(xv.data() + first * c, c, out);
    std::fill_n(win, c, first);
    for (int64_t j = 1; j < k; ++j) {
      const int32_t r = index[g * k + j];
      Require(r >= 0 && r < n, "gather-max index out of range");
      const Real* row = xv.data() + static_cast<int64_t>(r) * c;
      for (int64_t ch = 0; ch < c; ++ch) {
        if (row[ch] > out[ch]) {
          out[ch] = row[ch];
          win[ch] = r;
        }
      }
    }
  }
  if (Tracking()) {
    for (int32_t w : *winner) MixDecision(static_cast<uint64_t>(w));
  }
  auto node = MakeNode(std::move(y), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    node->backward = [xn, winner, c](const Tensor& g) {
      Tensor& gx = xn->GradBuffer();
      for (int64_t i = 0; i < g.numel(); ++i) {
        gx[static_cast<int64_t>((*winner)[i]) * c + i % c] += g[i];
      }
    };
  }
  return Var(node);
}

Var SegmentMax(const Var& x, int64_t k) {
  const int64_t rows = x.value().rows();
  Require(k >= 1 && rows % k == 0, "segment-max: rows not divisible by k");
  std::vector<int32_t> index(rows);
  for (int64_t i = 0; i < rows; ++i) index[i] = static_cast<int32_t>(i);
  return GatherMax(x, index, k);
}

Var SegmentSoftmax(const Var& x, int64_t k) {
  const Tensor& xv = x.value();
  const int64_t rows = xv.rows();
  const int64_t c = xv.cols();
  Require(k >= 1 && rows % k == 0, "segment-softmax: rows not divisible by k");
  Tensor y(xv.shape());
  std::vector<double> mx(c), sum(c);
  for (int64_t g0 = 0; g0 < rows; g0 += k) {
    for (int64_t ch = 0; ch < c; ++ch) {
      mx[ch] = -std::numeric_limits<double>::infinity();
      sum[ch] = 0.0;
    }
    for (int64_t r = g0; r < g0 + k; ++r) {
      for (int64_t ch = 0; ch < c; ++ch) mx[ch] = std::max<double>(mx[ch], xv.at(r, ch));
    }
    for (int64_t r = g0; r < g0 + k; ++r) {
      for (int64_t ch = 0; ch < c; ++ch) {
        const double e = std::exp(static_cast<double>(xv.at(r, ch)) - mx[ch]);
        y.at(r, ch) = static_cast<Real>(e);
        sum[ch] += e;
      }
    }
    for (int64_t r = g0; r < g0 + k; ++r) {
      for (int64_t ch = 0; ch < c; ++ch) {
        y.at(r, ch) = static_cast<Real>(y.at(r, ch) / sum[ch]);
      }
    }
  }
  auto node = MakeNode(std::move(y), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    std::weak_ptr<Node> self = node;
    node->backward = [xn, self, k, c](const Tensor& g) {
      const Tensor& s = self.lock()->value;
      Tensor& gx = xn->GradBuffer();
      std::vector<double> dot(c);
      for (int64_t g0 = 0; g0 < s.rows(); g0 += k) {
        std::fill(dot.begin(), dot.end(), 0.0);
        for (int64_t r = g0; r < g0 + k; ++r) {
          for (int64_t ch = 0; ch < c; ++ch) dot[ch] += g.at(r, ch) * s.at(r, ch);
        }
        for (int64_t r = g0; r < g0 + k; ++r) {
          for (int64_t ch = 0; ch < c; ++ch) {
            gx.at(r, ch) += static_cast<Real>(s.at(r, ch) * (g.at(r, ch) - dot[ch]));
          }
        }
      }
    };
  }
  return Var(node);
}

Var SliceCols(const Var& x, int64_t begin, int64_t end) {
  const Tensor& xv = x.value();
  const int64_t c = xv.cols();
  Require(0 <= begin && begin < end && end <= c, "slice columns out of range");
  const int64_t w = end - begin;
  Tensor y({xv.rows(), w});
  for (int64_t r = 0; r < xv.rows(); ++r) {
    std::copy_n(xv.data() + r * c + begin, w, y.data() + r * w);
  }
  auto node = MakeNode(std::move(y), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    node->backward = [xn, begin, w, c](const Tensor& g) {
      Tensor& gx = xn->GradBuffer();
      for (int64_t r = 0; r < g.rows(); ++r) {
        for (int64_t j = 0; j < w; ++j) gx[r * c + begin + j] += g[r * w + j];
      }
    };
  }
  return Var(node);
}

Var ConcatCols(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Require(av.rows() == bv.rows(), "concat: row count mismatch");
  const int64_t ca = av.cols(), cb = bv.cols(), c = ca + cb;
  Tensor y({av.rows(), c});
  for (int64_t r = 0; r < av.rows(); ++r) {
    std::copy_n(av.data() + r * ca, ca, y.data() + r * c);
    std::copy_n(bv.data() + r * cb, cb, y.data() + r * c + ca);
  }
  auto node = MakeNode(std::move(y), a.requires_grad() || b.requires_grad());
  if (node->requires_grad) {
    auto an = a.node(), bn = b.node();
    node->backward = [an, bn, ca, cb, c](const Tensor& g) {
      const int64_t rows = g.rows();
      if (an->requires_grad) {
        Tensor& ga = an->GradBuffer();
        for (int64_t r = 0; r < rows; ++r) {
          for (int64_t j = 0; j < ca; ++j) ga[r * ca + j] += g[r * c + j];
        }
      }
      if (bn->requires_grad) {
        Tensor& gb = bn->GradBuffer();
        for (int64_t r = 0; r < rows; ++r) {
          for (int64_t j = 0; j < cb; ++j) gb[r * cb + j] += g[r * c + ca + j];
        }
      }
    };
  }
  return Var(node);
}

Var Reshape(const Var& x, int64_t rows, int64_t cols) {
  Tensor y = x.value();
  y.Reshape({rows, cols});
  auto node = MakeNode(std::move(y), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    node->backward = [xn](const Tensor& g) {
      Tensor& gx = xn->GradBuffer();
      for (int64_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
    };
  }
  return Var(node);
}

Var Sum(const Var& x) {
  double s = 0.0;
  for (Real v : x.value().values()) s += v;
  auto node = MakeNode(Tensor({1}, static_cast<Real>(s)), x.requires_grad());
  if (node->requires_grad) {
    auto xn = x.node();
    node->backward = [xn](const Tensor& g) {
      Tensor& gx = xn->GradBuffer();
      for (int64_t i = 0; i < gx.numel(); ++i) gx[i] += g[0];
    };
  }
  return Var(node);
}

Var ChamferLoss(const Var& pred, const geom::PointCloud& target,
                const geom::SpatialIndex& target_index) {
  const Tensor& pv = pred.value();
  Require(pv.cols() == 3 && pv.rows() > 0, "chamfer: prediction must be [P, 3]");
  Require(!target.empty(), "chamfer: empty target");
  const int64_t np = pv.rows();
  const size_t nt = target.size();
  std::vector<geom::Vec3> pts(np);
  for (int64_t i = 0; i < np; ++i) {
    pts[i] = {pv.at(i, 0), pv.at(i, 1), pv.at(i, 2)};
  }
  const geom::PointCloud pred_cloud(pts);
  const geom::SpatialIndex pred_index(pred_cloud);
  auto to_target = std::make_shared<std::vector<int32_t>>(np);
  auto to_pred = std::make_shared<std::vector<int32_t>>(nt);
  double sum_p = 0.0, sum_t = 0.0;
  for (int64_t i = 0; i < np; ++i) {
    double d2;
    (*to_target)[i] = target_index.Nearest(pts[i], &d2);
    sum_p += d2;
  }
  for (size_t j = 0; j < nt; ++j) {
    double d2;
    (*to_pred)[j] = pred_index.Nearest(target[j], &d2);
    sum_t += d2;
  }
  if (Tracking()) {
    for (int32_t v : *to_target) MixDecision(static_cast<uint64_t>(v));
    for (int32_t v : *to_pred) MixDecision(static_cast<uint64_t>(v) << 32);
  }
  const double loss = sum_p / np + sum_t / static_cast<double>(nt);
  auto node = MakeNode(Tensor({1}, static_cast<Real>(loss)), pred.requires_grad());
  if (node->requires_grad) {
    auto pn = pred.node();
    auto tgt = std::make_shared<std::vector<geom::Vec3>>(target.points().begin(),
                                                         target.points().end());
    node->backward = [pn, tgt, to_target, to_pred, np](const Tensor& g) {
      Tensor& gp = pn->GradBuffer();
      const Tensor& p = pn->value;
      const double wp = 2.0 * g[0] / static_cast<double>(np);
      const double wt = 2.0 * g[0] / static_cast<double>(tgt->size());
      for (int64_t i = 0; i < np; ++i) {
        const geom::Vec3& t = (*tgt)[(*to_target)[i]];
        for (int d = 0; d < 3; ++d) gp.at(i, d) += static_cast<Real>(wp * (p.at(i, d) - t[d]));
      }
      for (size_t j = 0; j < tgt->size(); ++j) {
        const int32_t i = (*to_pred)[j];
        const geom::Vec3& t = (*tgt)[j];
        for (int d = 0; d < 3; ++d) gp.at(i, d) += static_cast<Real>(wt * (p.at(i, d) - t[d]));
      }
    };
  }
  return Var(node);
}

double LaplaceBinMass(double x, double mu, double b) {
  const double l = (x - 0.5 - mu) / b;
  const double u = (x + 0.5 - mu) / b;
  if (l >= 0.0) return 0.5 * (std::exp(-l) - std::exp(-u));
  if (u <= 0.0) return 0.5 * (std::exp(u) - std::exp(l));
  return 1.0 - 0.5 * std::exp(-u) - 0.5 * std::exp(l);
}

Var LaplaceBits(const Var& x, const Var& mu, const Var& scale) {
  CheckSameShape(x, mu, "laplace-bits");
  CheckSameShape(x, scale, "laplace-bits");
  const int64_t n = x.value().numel();
  auto floored = std::make_shared<std::vector<uint8_t>>(n);
  double bits = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double b = scale.value()[i];
    if (!(b > 0.0)) Fail(ErrorCode::kNumeric, "non-positive Laplacian scale");
    const double p = LaplaceBinMass(x.value()[i], mu.value()[i], b);
    (*floored)[i] = p < kLikelihoodFloor;
    bits -= std::log2(std::max(p, kLikelihoodFloor));
  }
  if (Tracking()) {
    for (int64_t i = 0; i < n; ++i) {
      if ((*floored)[i]) MixDecision(static_cast<uint64_t>(i));
    }
  }
  const bool needs = x.requires_grad() || mu.requires_grad() || scale.requires_grad();
  auto node = MakeNode(Tensor({1}, static_cast<Real>(bits)), needs);
  if (node->requires_grad) {
    auto xn = x.node(), mn = mu.node(), sn = scale.node();
    node->backward = [xn, mn, sn, floored, n](const Tensor& g) {
      Tensor* gx = xn->requires_grad ? &xn->GradBuffer() : nullptr;
      Tensor* gm = mn->requires_grad ? &mn->GradBuffer() : nullptr;
      Tensor* gs = sn->requires_grad ? &sn->GradBuffer() : nullptr;
      for (int64_t i = 0; i < n; ++i) {
        if ((*floored)[i]) continue;
        const double xv = xn->value[i], m = mn->value[i], b = sn->value[i];
        const double p = LaplaceBinMass(xv, m, b);
        const double l = (xv - 0.5 - m) / b;
        const double u = (xv + 0.5 - m) / b;
        const double fu = 0.5 * std::exp(-std::abs(u)) / b;
        const double fl = 0.5 * std::exp(-std::abs(l)) / b;
        // d(-log2 p) = -dp / (p ln 2)
        const double k = -g[0] / (p * std::log(2.0));
        if (gx) (*gx)[i] += static_cast<Real>(k * (fu - fl));
        if (gm) (*gm)[i] += static_cast<Real>(k * (fl - fu));
        if (gs) (*gs)[i] += static_cast<Real>(k * (l * fl - u * fu));
      }
    };
  }
  return Var(node);
}

}  // namespace pointsoup::nn
