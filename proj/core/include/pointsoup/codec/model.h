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

#ifndef POINTSOUP_CODEC_MODEL_H_
#define POINTSOUP_CODEC_MODEL_H_

#include <cstdint>
#include <string>

#include "pointsoup/awds/awds.h"
#include "pointsoup/dwem/dwem.h"
#include "pointsoup/dwus/dwus.h"
#include "pointsoup/nn/weights.h"

namespace pointsoup::codec {

// Architecture of the learned networks. Stored as JSON in the weights
// archive so a decoder can rebuild the exact layout.
struct ModelConfig {
  int64_t channels = 128;         // C
  int64_t compact_channels = 16;  // c
  int64_t embed_hidden = 64;
  int64_t intra_neighbors = 16;   // k_m
  int64_t attention_blocks = 2;   // L
  int64_t entropy_hidden = 64;
  int64_t head_hidden = 128;
  int64_t refine_hidden = 128;
  int64_t fold_hidden = 256;      // fold2 narrows to half in its last layer
  int64_t grid_rows = 64;         // R_max
  int64_t grid_dim = 8;           // D
  int64_t points_per_row = 2;     // u

  std::string ToJson() const;
  static ModelConfig FromJson(const std::string& text);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// All learnable sub-networks over one parameter store. Movable; parameter
// addresses survive the move.
class Model {
 public:
  explicit Model(const ModelConfig& config = {});

  // Fresh weights drawn from `seed`.
  static Model Initialized(uint64_t seed, const ModelConfig& config = {});
  static Model FromArchive(std::span<const uint8_t> archive);
  static Model Load(const std::string& path);

  void Initialize(uint64_t seed);
  void Save(const std::string& path) const;
  Bytes Serialize() const { return weights_.Serialize(); }

  const ModelConfig& config() const { return config_; }
  nn::ModelWeights& weights() { return weights_; }
  const nn::ModelWeights& weights() const { return weights_; }
  const awds::AwdsNetwork& awds() const { return awds_; }
  const dwem::DwemNetwork& dwem() const { return dwem_; }
  const dwus::DwusNetwork& dwus() const { return dwus_; }
  awds::AwdsNetwork& awds() { return awds_; }
  dwem::DwemNetwork& dwem() { return dwem_; }
  dwus::DwusNetwork& dwus() { return dwus_; }

 private:
  ModelConfig config_;
  nn::ModelWeights weights_;
  awds::AwdsNetwork awds_;
  dwem::DwemNetwork dwem_;
  dwus::DwusNetwork dwus_;
};

}  // namespace pointsoup::codec

#endif  // POINTSOUP_CODEC_MODEL_H_
