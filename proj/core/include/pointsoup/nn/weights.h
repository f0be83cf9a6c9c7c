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

#ifndef POINTSOUP_NN_WEIGHTS_H_
#define POINTSOUP_NN_WEIGHTS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pointsoup/base/bytes.h"
#include "pointsoup/nn/tensor.h"

namespace pointsoup::nn {

struct Parameter {
  std::string name;  // dotted path, e.g. "awds.attn.0.pos.w1"
  Tensor value;
  Tensor grad;       // same shape as value
};

// Named-tensor archive holding every learnable parameter of a model.
// Parameter addresses are stable for the lifetime of the store.
//
// Serialized layout (little-endian):
//   magic "PSWT" | version u32 | meta-len u32 | meta bytes |
//   count u32 | count x { name-len u16 | name | rank u8 | dims u32[rank] |
//   offset u64 } | payload float32[...]
// Offsets count float32 elements from the start of the payload. The meta
// bytes are an opaque string owned by the model (architecture description).
class ModelWeights {
 public:
  ModelWeights() = default;
  ModelWeights(const ModelWeights&) = delete;
  ModelWeights& operator=(const ModelWeights&) = delete;
  ModelWeights(ModelWeights&&) = default;
  ModelWeights& operator=(ModelWeights&&) = default;

  // Adds a zero-filled parameter; throws if the name is taken.
  Parameter& Add(const std::string& name, std::vector<int64_t> shape);

  Parameter& Get(const std::string& name);
  const Parameter& Get(const std::string& name) const;
  bool Contains(const std::string& name) const { return by_name_.contains(name); }

  const std::vector<std::unique_ptr<Parameter>>& parameters() const { return params_; }
  size_t TotalCount() const;

  void ZeroGrad();
  void CopyValuesFrom(const ModelWeights& other);

  std::string& meta() { return meta_; }
  const std::string& meta() const { return meta_; }

  Bytes Serialize() const;
  // Loads values into an existing store whose names and shapes must match.
  void LoadValues(std::span<const uint8_t> archive);
  // Parses an archive into a fresh store.
  static ModelWeights Deserialize(std::span<const uint8_t> archive);

  void Save(const std::string& path) const;
  static ModelWeights Load(const std::string& path);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, size_t> by_name_;
  std::string meta_;
};

}  // namespace pointsoup::nn

#endif  // POINTSOUP_NN_WEIGHTS_H_
