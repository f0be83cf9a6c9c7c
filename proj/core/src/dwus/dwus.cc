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

#include "pointsoup/dwus/dwus.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "pointsoup/base/error.h"
#include "pointsoup/nn/ops.h"

namespace pointsoup::dwus {
namespace {

std::vector<int64_t> Widths(int64_t in, const std::vector<int64_t>& hidden, int64_t out) {
  std::vector<int64_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

}  // namespace

std::vector<int32_t> SelectRows(int64_t rows, int64_t grid_rows, FoldMode mode,
                                Rng* rng) {
  Require(rows >= 1 && rows <= grid_rows,
          "fold: R=" + std::to_string(rows) + " outside [1, " +
              std::to_string(grid_rows) + "]");
  std::vector<int32_t> out(static_cast<size_t>(rows));
  if (mode == FoldMode::kInfer) {
    for (int64_t j = 0; j < rows; ++j) out[j] = static_cast<int32_t>(j * grid_rows / rows);
    return out;
  }
  Require(rng != nullptr, "fold: train mode needs a random source");
  std::vector<int32_t> all(static_cast<size_t>(grid_rows));
  std::iota(all.begin(), all.end(), 0);
  for (int64_t j = 0; j < rows; ++j) {
    const auto pick = j + static_cast<int64_t>(rng->UniformInt(grid_rows - j));
    std::swap(all[j], all[pick]);
  }
  std::copy(all.begin(), all.begin() + rows, out.begin());
  std::sort(out.begin(), out.end());
  return out;
}

DwusNetwork::DwusNetwork(nn::ModelWeights& weights, const DwusConfig& config)
    : config_(config),
      refine_(weights, "dwus.refine",
              {config.channels + 3, config.refine_hidden, config.channels}),
      fold1_(weights, "dwus.fold1",
             Widths(config.channels, config.fold1_hidden, config.grid_rows * config.grid_dim)),
      fold2_(weights, "dwus.fold2",
             Widths(config.grid_dim + config.channels, config.fold2_hidden,
                    3 * config.points_per_row)) {}

void DwusNetwork::Initialize(Rng& rng) {
  refine_.Initialize(rng);
  fold1_.Initialize(rng);
  fold2_.Initialize(rng);
}

nn::Var DwusNetwork::Refine(const nn::Var& features, const dwem::DilatedWindows& dw) const {
  Require(features.value().rows() == dw.count && features.value().cols() == config_.channels,
          "refine: features " + features.value().ShapeString() + " do not match " +
              std::to_string(dw.count) + " windows");
  const nn::Var gathered = nn::GatherRows(features, dw.indices);
  const nn::Var groups = nn::ConcatCols(gathered, nn::Constant(dw.Relative(0, dw.count)));
  return nn::Add(features, nn::SegmentMax(refine_.Forward(groups), dw.size));
}

nn::Var DwusNetwork::Fold(const nn::Var& features, std::span<const int32_t> rows,
                          int64_t r) const {
  const int64_t w = features.value().rows();
  const int64_t grid_rows = config_.grid_rows;
  Require(r >= 1 && r <= grid_rows, "fold: R=" + std::to_string(r) + " exceeds R_max=" +
                                        std::to_string(grid_rows));
  Require(static_cast<int64_t>(rows.size()) == w * r, "fold: row table has the wrong size");
  const nn::Var grid = nn::Reshape(fold1_.Forward(features), w * grid_rows, config_.grid_dim);
  std::vector<int32_t> grid_index(rows.size());
  std::vector<int32_t> owner(rows.size());
  for (int64_t i = 0; i < w; ++i) {
    for (int64_t j = 0; j < r; ++j) {
      const size_t s = static_cast<size_t>(i * r + j);
      Require(rows[s] >= 0 && rows[s] < grid_rows, "fold: grid row out of range");
      grid_index[s] = static_cast<int32_t>(i * grid_rows + rows[s]);
      owner[s] = static_cast<int32_t>(i);
    }
  }
  const nn::Var selected = nn::GatherRows(grid, grid_index);
  const nn::Var input = nn::ConcatCols(selected, nn::GatherRows(features, owner));
  return nn::Reshape(fold2_.Forward(input), w * r * config_.points_per_row, 3);
}

nn::Var DwusNetwork::Fold(const nn::Var& features, int64_t r, FoldMode mode, Rng* rng) const {
  const int64_t w = features.value().rows();
  std::vector<int32_t> rows;
  rows.reserve(static_cast<size_t>(w * r));
  if (mode == FoldMode::kInfer) {
    const std::vector<int32_t> one = SelectRows(r, config_.grid_rows, mode, nullptr);
    for (int64_t i = 0; i < w; ++i) rows.insert(rows.end(), one.begin(), one.end());
  } else {
    for (int64_t i = 0; i < w; ++i) {
      const std::vector<int32_t> one = SelectRows(r, config_.grid_rows, mode, rng);
      rows.insert(rows.end(), one.begin(), one.end());
    }
  }
  return Fold(features, rows, r);
}

int64_t GridRows(int64_t k, int64_t ratio) {
  Require(k >= 1 && ratio >= 1, "grid rows: K and r must be positive");
  return std::max<int64_t>(1, k / ratio);
}

geom::PointCloud InverseAlign(const nn::Tensor& aligned, std::span<const geom::Vec3> bones,
                              double density, int64_t per_window) {
  Require(aligned.cols() == 3 && per_window >= 1 &&
              aligned.rows() == static_cast<int64_t>(bones.size()) * per_window,
          "inverse_align: expected " + std::to_string(bones.size()) + " x " +
              std::to_string(per_window) + " points, got " + aligned.ShapeString());
  std::vector<geom::Vec3> pts(static_cast<size_t>(aligned.rows()));
  for (int64_t i = 0; i < aligned.rows(); ++i) {
    const geom::Vec3& bone = bones[static_cast<size_t>(i / per_window)];
    for (int a = 0; a < 3; ++a) pts[i][a] = static_cast<double>(aligned.at(i, a)) * density + bone[a];
  }
  return geom::PointCloud(std::move(pts));
}

geom::PointCloud InverseAlign(std::span<const geom::Vec3> aligned,
                              std::span<const geom::Vec3> bones, double density,
                              int64_t per_window) {
  Require(per_window >= 1 && aligned.size() == bones.size() * static_cast<size_t>(per_window),
          "inverse_align: point count does not match bones");
  std::vector<geom::Vec3> pts(aligned.size());
  for (size_t i = 0; i < aligned.size(); ++i) {
    const geom::Vec3& bone = bones[i / static_cast<size_t>(per_window)];
    for (int a = 0; a < 3; ++a) pts[i][a] = aligned[i][a] * density + bone[a];
  }
  return geom::PointCloud(std::move(pts));
}

nn::Var InverseAlignVar(const nn::Var& aligned, std::span<const geom::Vec3> bones,
                        double density, int64_t per_window) {
  const int64_t rows = aligned.value().rows();
  Require(rows == static_cast<int64_t>(bones.size()) * per_window,
          "inverse_align: point count does not match bones");
  nn::Tensor offset({rows, 3});
  for (int64_t i = 0; i < rows; ++i) {
    for (int a = 0; a < 3; ++a) {
      offset.at(i, a) = static_cast<nn::Real>(bones[static_cast<size_t>(i / per_window)][a]);
    }
  }
  return nn::Add(nn::Scale(aligned, density), nn::Constant(std::move(offset)));
}

geom::PointCloud DwusDecode(const DwusNetwork& network, const nn::Var& features,
                            const awds::Bones& bones, const dwem::DilatedWindows& dw,
                            int64_t k, int64_t ratio) {
  Require(bones.size() >= 2, "dwus: need at least two bones");
  const nn::Var refined = network.Refine(features, dw);
  const int64_t r = GridRows(k, ratio);
  const nn::Var aligned = network.Fold(refined, r, FoldMode::kInfer, nullptr);
  return InverseAlign(aligned.value(), bones.points, bones.density,
                      r * network.config().points_per_row);
}

}  // namespace pointsoup::dwus
