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

#include <gtest/gtest.h>

#include <cmath>

#include "net_oracles.h"
#include "oracles.h"
#include "pointsoup/base/error.h"
#include "pointsoup/coder/symbol_model.h"
#include "pointsoup/dwem/dwem.h"

namespace pointsoup::dwem {
namespace {

using geom::Vec3;
using testing::Mat;

DwemConfig SmallConfig() { return DwemConfig{12, 4, 8, 10, 9}; }

struct Net {
  nn::ModelWeights weights;
  DwemNetwork net;
  explicit Net(const DwemConfig& config, uint64_t seed = 1) : net(weights, config) {
    Rng rng(seed);
    net.Initialize(rng);
  }
};

nn::Tensor RandomTensor(Rng& rng, std::vector<int64_t> shape, double scale = 1.0) {
  nn::Tensor t(std::move(shape));
  for (nn::Real& v : t.values()) v = static_cast<nn::Real>(rng.Uniform(-scale, scale));
  return t;
}

double LaplaceCdf(double x, double mu, double b) {
  return x < mu ? 0.5 * std::exp((x - mu) / b) : 1.0 - 0.5 * std::exp(-(x - mu) / b);
}

TEST(DilatedWindows, SingleBoneClampsToSelf) {
  awds::Bones bones;
  bones.points = {{4, 5, 6}};
  bones.density = 1.0;
  const DilatedWindows dw = BuildDilatedWindows(bones, 8);
  EXPECT_EQ(dw.count, 1);
  EXPECT_EQ(dw.size, 1);
  EXPECT_EQ(dw.indices, std::vector<int32_t>{0});
  EXPECT_EQ(dw.rel[0], (Vec3{0, 0, 0}));
}

TEST(DilatedWindows, LineNeighborsFollowTieBreak) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({static_cast<double>(i), 0, 0});
  const awds::Bones bones = awds::MakeBones(pts);
  EXPECT_EQ(bones.density, 1.0);
  const DilatedWindows dw = BuildDilatedWindows(bones, 3);
  EXPECT_EQ(std::vector<int32_t>(dw.indices.begin() + 9, dw.indices.begin() + 12),
            (std::vector<int32_t>{3, 2, 4}));
  EXPECT_EQ(dw.rel[10], (Vec3{-1, 0, 0}));
  EXPECT_EQ(dw.rel[11], (Vec3{1, 0, 0}));
}

TEST(DilatedWindows, MatchBruteForceOracle) {
  Rng rng(1);
  const awds::Bones bones = awds::MakeBones(testing::RandomGridPoints(rng, 64));
  const DilatedWindows dw = BuildDilatedWindows(bones, 8);
  for (int64_t i = 0; i < 64; ++i) {
    const std::vector<int32_t> want = testing::BruteKnn(bones.points, bones.points[i], 8);
    for (int64_t j = 0; j < 8; ++j) {
      const size_t r = static_cast<size_t>(i * 8 + j);
      ASSERT_EQ(dw.indices[r], want[j]);
      for (int a = 0; a < 3; ++a) {
        EXPECT_EQ(dw.rel[r][a],
                  (bones.points[want[j]][a] - bones.points[i][a]) / bones.density);
      }
    }
    EXPECT_EQ(dw.indices[static_cast<size_t>(i * 8)], i);
    EXPECT_EQ(dw.rel[static_cast<size_t>(i * 8)], (Vec3{0, 0, 0}));
  }
}

TEST(CompactStretch, ZeroWeightsGiveBias) {
  Net n(SmallConfig());
  n.net.compact_weight().value.Fill(0);
  n.net.compact_bias().value.Fill(0.5f);
  Rng rng(2);
  const nn::Tensor out = n.net.Compact(nn::Constant(RandomTensor(rng, {3, 12}))).value();
  ASSERT_EQ(out.shape(), (std::vector<int64_t>{3, 4}));
  for (nn::Real v : out.values()) EXPECT_EQ(v, 0.5f);
}

TEST(CompactStretch, IdentityWhenWidthsMatch) {
  Net n(DwemConfig{6, 6, 4, 4, 4});
  auto& w = n.net.compact_weight().value;
  w.Fill(0);
  for (int i = 0; i < 6; ++i) w.at(i, i) = 1;
  n.net.compact_bias().value.Fill(0);
  Rng rng(3);
  const nn::Tensor x = RandomTensor(rng, {5, 6});
  EXPECT_EQ(n.net.Compact(nn::Constant(x)).value(), x);
}

TEST(CompactStretch, MatchScalarReference) {
  Net n(SmallConfig());
  Rng rng(4);
  const nn::Tensor x = RandomTensor(rng, {7, 12});
  const Mat want = testing::Affine(testing::ToMat(x), testing::Values(n.net.compact_weight().value),
                                   testing::Values(n.net.compact_bias().value), 4);
  const nn::Tensor got = n.net.Compact(nn::Constant(x)).value();
  for (int64_t i = 0; i < got.numel(); ++i) EXPECT_NEAR(got[i], want.v[i], 1e-6);
  const nn::Tensor back = n.net.Stretch(nn::Constant(got)).value();
  const Mat want_back = testing::Affine(testing::ToMat(got), testing::Values(n.net.stretch_weight().value),
                                        testing::Values(n.net.stretch_bias().value), 12);
  for (int64_t i = 0; i < back.numel(); ++i) EXPECT_NEAR(back[i], want_back.v[i], 1e-6);
  EXPECT_THROW(n.net.Compact(nn::Constant(nn::Tensor({2, 5}))), Error);
  EXPECT_THROW(n.net.Stretch(nn::Constant(nn::Tensor({2, 12}))), Error);
}

TEST(Quantize, RoundsHalfAwayFromZero) {
  const nn::Tensor f({6}, std::vector<nn::Real>{0.0f, 0.5f, -0.5f, 1.49f, -2.5f, 40000.4f});
  EXPECT_EQ(Quantize(f), (std::vector<int32_t>{0, 1, -1, 1, -3, 40000}));
  try {
    Quantize(nn::Tensor({1}, std::vector<nn::Real>{std::numeric_limits<nn::Real>::infinity()}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
  }
  EXPECT_THROW(Quantize(nn::Tensor({1}, std::vector<nn::Real>{3e9f})), Error);
}

TEST(Noise, BoundedAndCentred) {
  Rng rng(5);
  const nn::Tensor like({1000, 1000});
  const nn::Tensor u = UniformNoise(like, rng);
  double sum = 0.0;
  for (nn::Real v : u.values()) {
    ASSERT_GE(v, -0.5f);
    ASSERT_LE(v, 0.5f);
    sum += v;
  }
  EXPECT_LT(std::abs(sum / 1e6), 2e-3);

  const nn::Tensor f = RandomTensor(rng, {50, 4}, 100.0);
  Rng a(9), b(9);
  const nn::Tensor noisy = AddNoise(nn::Constant(f), a).value();
  EXPECT_EQ(noisy, AddNoise(nn::Constant(f), b).value());
  for (int64_t i = 0; i < f.numel(); ++i) EXPECT_LE(std::abs(noisy[i] - f[i]), 0.5f + 1e-4f);
}

TEST(EstimateParams, ZeroHeadGivesConstantParams) {
  Net n(SmallConfig());
  n.net.head().ZeroOutputLayer();
  Rng rng(6);
  const awds::Bones bones = awds::MakeBones(testing::RandomGridPoints(rng, 20));
  const LaplaceVars v = n.net.EstimateParams(BuildDilatedWindows(bones, 8));
  ASSERT_EQ(v.mu.value().shape(), (std::vector<int64_t>{20, 4}));
  for (nn::Real m : v.mu.value().values()) EXPECT_EQ(m, 0.0f);
  for (nn::Real s : v.scale.value().values()) EXPECT_NEAR(s, std::log(2.0) + 1e-9, 1e-6);
}

TEST(EstimateParams, CongruentWindowsGiveEqualParams) {
  // Two translated copies of the same cluster, far apart.
  Rng rng(7);
  std::vector<Vec3> pts = testing::RandomGridPoints(rng, 8, 16);
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) pts.push_back({pts[i][0] + 500, pts[i][1] + 500, pts[i][2] + 500});
  const awds::Bones bones = awds::MakeBones(pts);
  Net net(SmallConfig());
  const LaplaceVars v = net.net.EstimateParams(BuildDilatedWindows(bones, 8));
  for (size_t i = 0; i < n; ++i) {
    for (int64_t c = 0; c < 4; ++c) {
      EXPECT_EQ(v.mu.value().at(i, c), v.mu.value().at(i + n, c));
      EXPECT_EQ(v.scale.value().at(i, c), v.scale.value().at(i + n, c));
    }
  }
}

TEST(EstimateParams, MatchScalarReference) {
  Rng rng(8);
  const awds::Bones bones = awds::MakeBones(testing::RandomGridPoints(rng, 30));
  const DilatedWindows dw = BuildDilatedWindows(bones, 8);
  Net net(SmallConfig());
  const LaplaceVars v = net.net.EstimateParams(dw, 3, 9);
  for (int64_t w = 3; w < 9; ++w) {
    Mat rel(8, 3);
    for (int64_t j = 0; j < 8; ++j) {
      for (int a = 0; a < 3; ++a) rel.at(j, a) = dw.rel[static_cast<size_t>(w * 8 + j)][a];
    }
    const Mat pooled = testing::GroupMaxRef(testing::MlpRef(net.weights, "dwem.conv", rel), 8);
    const Mat raw = testing::MlpRef(net.weights, "dwem.head", pooled);
    for (int64_t c = 0; c < 4; ++c) {
      EXPECT_NEAR(v.mu.value().at(w - 3, c), raw.at(0, c), 1e-5);
      const double s = std::log1p(std::exp(raw.at(0, 4 + c))) + 1e-9;
      EXPECT_NEAR(v.scale.value().at(w - 3, c), s, 1e-5);
    }
  }
}

TEST(Likelihood, ClosedFormExamples) {
  EXPECT_NEAR(Likelihood(0, 0, 1), 1.0 - std::exp(-0.5), 1e-12);
  EXPECT_NEAR(Likelihood(0, 0, 1), 0.393469, 1e-6);
  for (double mu : {-3.0, 0.0, 2.0}) {
    for (double x = mu - 5; x <= mu + 5; x += 1) {
      if (x != mu) EXPECT_LT(Likelihood(x, mu, 1.3), Likelihood(mu, mu, 1.3));
    }
  }
  double sum = 0.0;
  for (int x = -100; x <= 100; ++x) sum += Likelihood(x, 0, 2);
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(Likelihood, ProperPmfOverScaleRange) {
  Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const double b = std::pow(10.0, rng.Uniform(-3, 3));
    const double mu = rng.Uniform(-20, 20);
    const int lo = static_cast<int>(std::floor(mu - 30 * b)) - 2;
    const int hi = static_cast<int>(std::ceil(mu + 30 * b)) + 2;
    double sum = LaplaceCdf(lo - 0.5, mu, b) + (1.0 - LaplaceCdf(hi + 0.5, mu, b));
    for (int x = lo; x <= hi; ++x) sum += Likelihood(x, mu, b);
    EXPECT_NEAR(sum, 1.0, 1e-9) << "b=" << b;
  }
}

TEST(Likelihood, IntegerShiftInvariant) {
  Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = std::round(rng.Uniform(-50, 50));
    const double mu = rng.Uniform(-50, 50);
    const double b = std::exp(rng.Uniform(-3, 3));
    const double m = std::round(rng.Uniform(-20, 20));
    EXPECT_NEAR(Likelihood(x, mu, b), Likelihood(x - m, mu - m, b), 1e-12);
  }
}

TEST(Rate, Examples) {
  // mu = 0 with b = 1/ln 4 gives P(0) = 1 - 4^(-1/2) = 0.5 exactly.
  const int64_t m = 10, c = 4;
  const nn::Tensor mu({m, c});
  const nn::Tensor half({m, c}, static_cast<nn::Real>(1.0 / std::log(4.0)));
  const std::vector<int32_t> zeros(static_cast<size_t>(m * c), 0);
  EXPECT_NEAR(Rate(zeros, mu, half, 100), (m * c) / 100.0, 1e-5);
  const nn::Tensor tiny({m, c}, 1e-6f);
  EXPECT_NEAR(Rate(zeros, mu, tiny, 100), 0.0, 1e-12);

  Rng rng(11);
  const nn::Tensor rmu = RandomTensor(rng, {m, c}, 3.0);
  nn::Tensor rs({m, c});
  for (nn::Real& s : rs.values()) s = static_cast<nn::Real>(rng.Uniform(0.1, 4));
  std::vector<int32_t> q;
  double bits = 0.0;
  for (int64_t i = 0; i < m * c; ++i) {
    q.push_back(static_cast<int32_t>(rng.UniformInt(11)) - 5);
    const double p = LaplaceCdf(q.back() + 0.5, rmu[i], rs[i]) - LaplaceCdf(q.back() - 0.5, rmu[i], rs[i]);
    bits -= std::log2(std::max(p, 1e-9));
  }
  EXPECT_NEAR(Rate(q, rmu, rs, 37), bits / 37, 1e-9);
  EXPECT_EQ(Likelihoods(q, rmu, rs).size(), q.size());
}

TEST(Rate, CodedLengthTracksEstimate) {
  Rng rng(12);
  const int64_t m = 2000, c = 16;
  nn::Tensor mu({m, c}), scale({m, c});
  std::vector<int32_t> q;
  for (int64_t i = 0; i < m * c; ++i) {
    mu[i] = static_cast<nn::Real>(rng.Uniform(-10, 10));
    scale[i] = static_cast<nn::Real>(std::exp(rng.Uniform(-2, 2)));
    const double u = rng.Uniform() - 0.5;
    const double x = mu[i] - scale[i] * std::copysign(std::log(1 - 2 * std::abs(u)), u);
    q.push_back(static_cast<int32_t>(std::lround(x)));
  }
  const size_t n = 10000;
  const double estimate_bits = Rate(q, mu, scale, n) * static_cast<double>(n);
  const Bytes stream = coder::EncodeSymbols(q, CodingModels(mu, scale));
  const double actual_bits = 8.0 * static_cast<double>(stream.size());
  EXPECT_LE(actual_bits, 1.01 * estimate_bits + 64.0);
  EXPECT_GE(actual_bits, 0.99 * estimate_bits - 64.0);
  EXPECT_EQ(coder::DecodeSymbols(stream, CodingModels(mu, scale)), q);
}

}  // namespace
}  // namespace pointsoup::dwem
