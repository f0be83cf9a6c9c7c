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

#include "pointsoup/train/trainer.h"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "pointsoup/awds/awds.h"
#include "pointsoup/base/error.h"
#include "pointsoup/codec/codec.h"
#include "pointsoup/dwem/dwem.h"
#include "pointsoup/dwus/dwus.h"
#include "pointsoup/geom/metrics.h"
#include "pointsoup/nn/ops.h"
#include "pointsoup/train/synthetic.h"

namespace pointsoup::train {
namespace {

// Salts for the independent random streams of one step.
constexpr uint64_t kBoneSalt = 11;
constexpr uint64_t kNoiseSalt = 12;
constexpr uint64_t kRowSalt = 13;
constexpr uint64_t kDataSalt = 21;

}  // namespace

void TrainConfig::Validate() const {
  Require(lambda >= 0.0 && std::isfinite(lambda), "train: lambda must be >= 0");
  Require(learning_rate > 0.0, "train: learning rate must be positive");
  Require(steps >= 1, "train: steps must be >= 1");
  Require(batch_size == 1, "train: only batch size 1 is supported");
  Require(window_size >= 1 && dilated_size >= 1 && ratio >= 1 && rps_factor >= 1,
          "train: window parameters must be positive");
  Require(min_points >= static_cast<size_t>(window_size) && min_points <= max_points,
          "train: point range must start at or above K");
}

std::string TrainConfig::ToJson() const {
  const nlohmann::json j = {
      {"lambda", lambda},         {"learning_rate", learning_rate},
      {"steps", steps},           {"batch_size", batch_size},
      {"window_size", window_size}, {"dilated_size", dilated_size},
      {"ratio", ratio},           {"rps_factor", rps_factor},
      {"seed", seed},             {"min_points", min_points},
      {"max_points", max_points},
  };
  return j.dump();
}

double Loss(double chamfer, double rate_bpp, double lambda) {
  return chamfer + lambda * rate_bpp;
}

TrainingGraph BuildTrainingGraph(const codec::Model& model, const geom::PointCloud& cloud,
                                 const geom::SpatialIndex& index, const TrainConfig& config,
                                 uint64_t seed) {
  const int64_t k = config.window_size;
  const size_t m = codec::ChooseM(cloud.size(), k);
  // Bones are lossless, so the coder is skipped here.
  const awds::Bones bones =
      awds::SampleBones(cloud, m, MixSeed(seed, kBoneSalt), config.rps_factor);
  const awds::AlignedWindowSet windows = awds::BuildAlignedWindows(cloud, index, bones, k);
  const nn::Var skin = model.awds().Forward(windows, 0, windows.count);

  Rng noise_rng(MixSeed(seed, kNoiseSalt));
  const nn::Var noisy = dwem::AddNoise(model.dwem().Compact(skin), noise_rng);
  const dwem::DilatedWindows dw = dwem::BuildDilatedWindows(bones, config.dilated_size);
  const dwem::LaplaceVars params = model.dwem().EstimateParams(dw);
  const nn::Var bits = nn::LaplaceBits(noisy, params.mu, params.scale);

  const nn::Var refined = model.dwus().Refine(model.dwem().Stretch(noisy), dw);
  const int64_t r = dwus::GridRows(k, config.ratio);
  Rng row_rng(MixSeed(seed, kRowSalt));
  const nn::Var aligned = model.dwus().Fold(refined, r, dwus::FoldMode::kTrain, &row_rng);
  const nn::Var pred = dwus::InverseAlignVar(aligned, bones.points, bones.density,
                                             r * model.config().points_per_row);

  TrainingGraph g;
  g.chamfer = nn::ChamferLoss(pred, cloud, index);
  g.rate = nn::Scale(bits, 1.0 / static_cast<double>(cloud.size()));
  g.loss = nn::Add(g.chamfer, nn::Scale(g.rate, config.lambda));
  return g;
}

StepMetrics TrainStep(codec::Model& model, nn::Adam& adam, const geom::PointCloud& cloud,
                      const TrainConfig& config, uint64_t seed) {
  const geom::SpatialIndex index(cloud);
  model.weights().ZeroGrad();
  StepMetrics metrics;
  {
    nn::Tape tape;
    const TrainingGraph g = BuildTrainingGraph(model, cloud, index, config, seed);
    metrics.chamfer = g.chamfer.value()[0];
    metrics.rate = g.rate.value()[0];
    metrics.loss = g.loss.value()[0];
    if (!std::isfinite(metrics.loss) || !std::isfinite(metrics.rate)) {
      std::ostringstream msg;
      msg << "train: non-finite loss (chamfer=" << metrics.chamfer
          << ", rate=" << metrics.rate << ", N=" << cloud.size() << ")";
      Fail(ErrorCode::kNumeric, msg.str());
    }
    tape.Backward(g.loss);
  }
  adam.Step(model.weights());
  return metrics;
}

double InferenceChamfer(const codec::Model& model, const geom::PointCloud& cloud,
                        int64_t window_size, uint64_t seed) {
  codec::CodecConfig config;
  config.window_size = window_size;
  const codec::EncodedFrame frame = codec::Encode(cloud, config, model, seed);
  return geom::ChamferDistance(cloud, codec::Decode(frame, model));
}

Trainer::Trainer(codec::Model& model, const TrainConfig& config)
    : model_(model),
      config_(config),
      adam_(model.weights(), nn::AdamOptions{config.learning_rate, 0.9, 0.999, 1e-8}) {
  config_.Validate();
}

StepMetrics Trainer::Step() {
  const uint64_t data_seed = MixSeed(MixSeed(config_.seed, kDataSalt), trace_.size());
  Rng rng(data_seed);
  const SyntheticSpec spec = RandomSpec(rng, config_.min_points, config_.max_points);
  return Step(GenerateSynthetic(spec, rng.Next()));
}

StepMetrics Trainer::Step(const geom::PointCloud& cloud) {
  const auto index = static_cast<uint64_t>(trace_.size());
  StepMetrics m = TrainStep(model_, adam_, cloud, config_, MixSeed(config_.seed, index));
  m.step = static_cast<int64_t>(trace_.size()) + 1;
  trace_.push_back(m);
  return m;
}

std::string Trainer::CheckpointJson() const {
  nlohmann::json trace = nlohmann::json::array();
  for (const StepMetrics& m : trace_) {
    trace.push_back({{"step", m.step}, {"chamfer", m.chamfer}, {"rate", m.rate},
                     {"loss", m.loss}});
  }
  const nlohmann::json j = {
      {"format", "pointsoup-checkpoint"},
      {"steps", steps_done()},
      {"config", nlohmann::json::parse(config_.ToJson())},
      {"model", nlohmann::json::parse(model_.config().ToJson())},
      {"parameters", model_.weights().TotalCount()},
      {"trace", trace},
  };
  return j.dump(2);
}

void Trainer::SaveCheckpoint(const std::string& weights_path) const {
  model_.Save(weights_path);
  const std::string text = CheckpointJson() + "\n";
  WriteFileBytes(weights_path + ".json", Bytes(text.begin(), text.end()));
}

}  // namespace pointsoup::train
