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

#include "pointsoup/codec/model.h"

#include <algorithm>

#include "json.hpp"
#include "pointsoup/base/error.h"

namespace pointsoup::codec {
namespace {

constexpr const char* kFormatName = "pointsoup-model";

awds::AwdsConfig AwdsFrom(const ModelConfig& c) {
  return {c.channels, c.embed_hidden, c.intra_neighbors, c.attention_blocks};
}

dwem::DwemConfig DwemFrom(const ModelConfig& c) {
  return {c.channels, c.compact_channels, c.entropy_hidden, c.channels, c.head_hidden};
}

dwus::DwusConfig DwusFrom(const ModelConfig& c) {
  dwus::DwusConfig d;
  d.channels = c.channels;
  d.refine_hidden = c.refine_hidden;
  d.fold1_hidden = {c.fold_hidden, c.fold_hidden};
  d.fold2_hidden = {c.fold_hidden, c.fold_hidden, std::max<int64_t>(1, c.fold_hidden / 2)};
  d.grid_rows = c.grid_rows;
  d.grid_dim = c.grid_dim;
  d.points_per_row = c.points_per_row;
  return d;
}

}  // namespace

std::string ModelConfig::ToJson() const {
  const nlohmann::json j = {
      {"format", kFormatName},
      {"channels", channels},
      {"compact_channels", compact_channels},
      {"embed_hidden", embed_hidden},
      {"intra_neighbors", intra_neighbors},
      {"attention_blocks", attention_blocks},
      {"entropy_hidden", entropy_hidden},
      {"head_hidden", head_hidden},
      {"refine_hidden", refine_hidden},
      {"fold_hidden", fold_hidden},
      {"grid_rows", grid_rows},
      {"grid_dim", grid_dim},
      {"points_per_row", points_per_row},
  };
  return j.dump();
}

ModelConfig ModelConfig::FromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("model config: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormatName) {
    Fail(ErrorCode::kFormat, "model config: not a pointsoup model description");
  }
  ModelConfig c;
  const auto read = [&](const char* key, int64_t& field) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer() || j[key].get<int64_t>() < 1 ||
        j[key].get<int64_t>() > 65536) {
      Fail(ErrorCode::kFormat, std::string("model config: bad field ") + key);
    }
    field = j[key].get<int64_t>();
  };
  read("channels", c.channels);
  read("compact_channels", c.compact_channels);
  read("embed_hidden", c.embed_hidden);
  read("intra_neighbors", c.intra_neighbors);
  read("attention_blocks", c.attention_blocks);
  read("entropy_hidden", c.entropy_hidden);
  read("head_hidden", c.head_hidden);
  read("refine_hidden", c.refine_hidden);
  read("fold_hidden", c.fold_hidden);
  read("grid_rows", c.grid_rows);
  read("grid_dim", c.grid_dim);
  read("points_per_row", c.points_per_row);
  return c;
}

Model::Model(const ModelConfig& config)
    : config_(config),
      awds_(weights_, AwdsFrom(config)),
      dwem_(weights_, DwemFrom(config)),
      dwus_(weights_, DwusFrom(config)) {
  weights_.meta() = config.ToJson();
}

Model Model::Initialized(uint64_t seed, const ModelConfig& config) {
  Model model(config);
  model.Initialize(seed);
  return model;
}

void Model::Initialize(uint64_t seed) {
  Rng awds_rng(MixSeed(seed, 1));
  Rng dwem_rng(MixSeed(seed, 2));
  Rng dwus_rng(MixSeed(seed, 3));
  awds_.Initialize(awds_rng);
  dwem_.Initialize(dwem_rng);
  dwus_.Initialize(dwus_rng);
}

Model Model::FromArchive(std::span<const uint8_t> archive) {
  const nn::ModelWeights loaded = nn::ModelWeights::Deserialize(archive);
  Model model(ModelConfig::FromJson(loaded.meta()));
  try {
    model.weights_.CopyValuesFrom(loaded);
  } catch (const Error& e) {
    Fail(ErrorCode::kFormat, std::string("weights archive does not match its model description: ") +
                                 e.what());
  }
  return model;
}

Model Model::Load(const std::string& path) {
  return FromArchive(ReadFileBytes(path));
}

void Model::Save(const std::string& path) const { weights_.Save(path); }

}  // namespace pointsoup::codec
