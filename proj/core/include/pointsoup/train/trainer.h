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

#ifndef POINTSOUP_TRAIN_TRAINER_H_
#define POINTSOUP_TRAIN_TRAINER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "pointsoup/codec/model.h"
#include "pointsoup/geom/point_cloud.h"
#include "pointsoup/geom/spatial_index.h"
#include "pointsoup/nn/adam.h"
#include "pointsoup/nn/autograd.h"

namespace pointsoup::train {

struct TrainConfig {
  double lambda = 1e-4;
  double learning_rate = 5e-4;
  int64_t steps = 2000;
  int64_t batch_size = 1;
  int64_t window_size = 128;
  int64_t dilated_size = 8;
  int64_t ratio = 4;
  size_t rps_factor = 16;
  uint64_t seed = 0;
  size_t min_points = 1024;
  size_t max_points = 4096;

  void Validate() const;
  std::string ToJson() const;
};

// Rate-distortion objective: chamfer + lambda * rate.
double Loss(double chamfer, double rate_bpp, double lambda);

struct StepMetrics {
  int64_t step = 0;
  double chamfer = 0.0;
  double rate = 0.0;  // bits per input point, noise path
  double loss = 0.0;
};

// Differentiable training graph for one cloud.
struct TrainingGraph {
  nn::Var chamfer;
  nn::Var rate;
  nn::Var loss;
};

// Builds the noise-path forward pass on the active tape (if any): bones,
// windows, skin features, noisy compact features, entropy model, refinement,
// train-mode folding and inverse alignment.
TrainingGraph BuildTrainingGraph(const codec::Model& model, const geom::PointCloud& cloud,
                                 const geom::SpatialIndex& index, const TrainConfig& config,
                                 uint64_t seed);

// One optimization step: forward, backward, Adam update. Throws kNumeric
// with the step's metrics if the loss is not finite.
StepMetrics TrainStep(codec::Model& model, nn::Adam& adam, const geom::PointCloud& cloud,
                      const TrainConfig& config, uint64_t seed);

// Chamfer distance of the full encode/decode path against the input.
double InferenceChamfer(const codec::Model& model, const geom::PointCloud& cloud,
                        int64_t window_size, uint64_t seed);

class Trainer {
 public:
  Trainer(codec::Model& model, const TrainConfig& config);

  // Step on the next synthetic cloud.
  StepMetrics Step();
  // Step on a caller-supplied cloud.
  StepMetrics Step(const geom::PointCloud& cloud);

  const std::vector<StepMetrics>& trace() const { return trace_; }
  int64_t steps_done() const { return static_cast<int64_t>(trace_.size()); }

  // Config, step count and metric trace as JSON.
  std::string CheckpointJson() const;
  // Writes the weights archive and a `<path>.json` sidecar.
  void SaveCheckpoint(const std::string& weights_path) const;

 private:
  codec::Model& model_;
  TrainConfig config_;
  nn::Adam adam_;
  std::vector<StepMetrics> trace_;
};

}  // namespace pointsoup::train

#endif  // POINTSOUP_TRAIN_TRAINER_H_
