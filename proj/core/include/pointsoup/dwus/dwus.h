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

#ifndef POINTSOUP_DWUS_DWUS_H_
#define POINTSOUP_DWUS_DWUS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pointsoup/awds/awds.h"
#include "pointsoup/base/random.h"
#include "pointsoup/dwem/dwem.h"
#include "pointsoup/geom/point_cloud.h"
#include "pointsoup/nn/autograd.h"
#include "pointsoup/nn/layers.h"
#include "pointsoup/nn/weights.h"

namespace pointsoup::dwus {

struct DwusConfig {
  int64_t channels = 128;
  int64_t refine_hidden = 128;
  int64_t grid_rows = 64;  // R_max
  int64_t grid_dim = 8;    // D
  std::vector<int64_t> fold1_hidden = {256, 256};
  std::vector<int64_t> fold2_hidden = {256, 256, 128};
  int64_t points_per_row = 2;  // u
};

enum class FoldMode { kTrain, kInfer };

// Grid rows used for R of R_max rows. Infer mode takes floor(j * R_max / R);
// train mode draws a uniform subset (in increasing order) from `rng`.
std::vector<int32_t> SelectRows(int64_t rows, int64_t grid_rows, FoldMode mode,
                                Rng* rng);

class DwusNetwork {
 public:
  DwusNetwork() = default;
  DwusNetwork(nn::ModelWeights& weights, const DwusConfig& config);

  void Initialize(Rng& rng);

  // Residual DWConv over the dilated windows: gather the k neighbor
  // features, append relative bone coordinates, MLP, max over k, add input.
  // features [M, C] -> [M, C].
  nn::Var Refine(const nn::Var& features, const dwem::DilatedWindows& dw) const;

  // Folding generator for a batch of W features [W, C]. `rows` holds R grid
  // row indices per window ([W * R]). Returns aligned coordinates
  // [W * R * u, 3], window-major.
  nn::Var Fold(const nn::Var& features, std::span<const int32_t> rows,
               int64_t r) const;

  // Fold with rows chosen by SelectRows for every window.
  nn::Var Fold(const nn::Var& features, int64_t r, FoldMode mode, Rng* rng) const;

  const DwusConfig& config() const { return config_; }
  nn::Mlp& refine_mlp() { return refine_; }
  nn::Mlp& fold1() { return fold1_; }
  nn::Mlp& fold2() { return fold2_; }

 private:
  DwusConfig config_;
  nn::Mlp refine_;
  nn::Mlp fold1_;
  nn::Mlp fold2_;
};

// R = max(1, floor(K / ratio)).
int64_t GridRows(int64_t k, int64_t ratio = 4);

// p * density + bone for consecutive blocks of `per_window` points.
geom::PointCloud InverseAlign(const nn::Tensor& aligned, std::span<const geom::Vec3> bones,
                              double density, int64_t per_window);

// Double-precision form over explicit coordinates.
geom::PointCloud InverseAlign(std::span<const geom::Vec3> aligned,
                              std::span<const geom::Vec3> bones, double density,
                              int64_t per_window);
// Differentiable form of InverseAlign for bones [begin, begin + W).
nn::Var InverseAlignVar(const nn::Var& aligned, std::span<const geom::Vec3> bones,
                        double density, int64_t per_window);

// Refine, fold in infer mode and inverse-align. features [M, C].
geom::PointCloud DwusDecode(const DwusNetwork& network, const nn::Var& features,
                            const awds::Bones& bones, const dwem::DilatedWindows& dw,
                            int64_t k, int64_t ratio = 4);

}  // namespace pointsoup::dwus

#endif  // POINTSOUP_DWUS_DWUS_H_
