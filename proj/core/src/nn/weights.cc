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

#include "pointsoup/nn/weights.h"

#include <cmath>

#include "pointsoup/base/error.h"

namespace pointsoup::nn {
namespace {

constexpr char kMagic[4] = {'P', 'S', 'W', 'T'};
constexpr uint32_t kVersion = 1;

struct Entry {
  std::string name;
  std::vector<int64_t> shape;
  uint64_t offset;
};

struct Parsed {
  std::string meta;
  std::vector<Entry> entries;
  std::span<const uint8_t> payload;
};

Parsed Parse(std::span<const uint8_t> archive) {
  ByteReader in(archive);
  const std::string magic = in.Str(4);
  if (magic != std::string(kMagic, 4)) Fail(ErrorCode::kFormat, "not a weights archive");
  const uint32_t version = in.U32();
  if (version != kVersion) {
    Fail(ErrorCode::kFormat, "unsupported weights version " + std::to_string(version));
  }
  Parsed p;
  p.meta = in.Str(in.U32());
  const uint32_t count = in.U32();
  uint64_t expected = 0;
  for (uint32_t i = 0; i < count; ++i) {
    Entry e;
    e.name = in.Str(in.U16());
    const uint8_t rank = in.U8();
    uint64_t n = 1;
    for (uint8_t d = 0; d < rank; ++d) {
      e.shape.push_back(in.U32());
      n *= static_cast<uint64_t>(e.shape.back());
    }
    e.offset = in.U64();
    if (e.offset != expected) Fail(ErrorCode::kFormat, "weights manifest offsets are not contiguous");
    expected += n;
    p.entries.push_back(std::move(e));
  }
  p.payload = in.Raw(in.remaining());
  if (p.payload.size() != expected * 4) {
    Fail(ErrorCode::kFormat, "weights payload holds " + std::to_string(p.payload.size()) +
                                 " bytes, manifest expects " + std::to_string(expected * 4));
  }
  return p;
}

void ReadValues(const Parsed& p, const Entry& e, Tensor& dst) {
  ByteReader in(p.payload.subspan(e.offset * 4, dst.numel() * 4));
  for (int64_t i = 0; i < dst.numel(); ++i) {
    const float v = in.F32();
    if (!std::isfinite(v)) Fail(ErrorCode::kNumeric, "non-finite value in '" + e.name + "'");
    dst[i] = static_cast<Real>(v);
  }
}

}  // namespace

Parameter& ModelWeights::Add(const std::string& name, std::vector<int64_t> shape) {
  Require(!name.empty() && name.size() < 65536, "bad parameter name");
  if (by_name_.contains(name)) {
    Fail(ErrorCode::kInvalidArgument, "duplicate parameter name '" + name + "'");
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Tensor(shape);
  p->grad = Tensor(shape);
  by_name_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ModelWeights::Get(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) Fail(ErrorCode::kInvalidArgument, "no parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter& ModelWeights::Get(const std::string& name) const {
  return const_cast<ModelWeights*>(this)->Get(name);
}

size_t ModelWeights::TotalCount() const {
  size_t n = 0;
  for (const auto& p : params_) n += static_cast<size_t>(p->value.numel());
  return n;
}

void ModelWeights::ZeroGrad() {
  for (auto& p : params_) p->grad.Fill(0);
}

void ModelWeights::CopyValuesFrom(const ModelWeights& other) {
  Require(other.params_.size() == params_.size(), "weights layouts differ");
  for (size_t i = 0; i < params_.size(); ++i) {
    Require(params_[i]->name == other.params_[i]->name &&
                params_[i]->value.shape() == other.params_[i]->value.shape(),
            "weights layouts differ at '" + params_[i]->name + "'");
    params_[i]->value = other.params_[i]->value;
  }
}

Bytes ModelWeights::Serialize() const {
  Bytes out;
  ByteWriter w(&out);
  w.Str(std::string(kMagic, 4));
  w.U32(kVersion);
  w.U32(static_cast<uint32_t>(meta_.size()));
  w.Str(meta_);
  w.U32(static_cast<uint32_t>(params_.size()));
  uint64_t offset = 0;
  for (const auto& p : params_) {
    w.U16(static_cast<uint16_t>(p->name.size()));
    w.Str(p->name);
    w.U8(static_cast<uint8_t>(p->value.rank()));
    for (int64_t d : p->value.shape()) w.U32(static_cast<uint32_t>(d));
    w.U64(offset);
    offset += static_cast<uint64_t>(p->value.numel());
  }
  for (const auto& p : params_) {
    for (Real v : p->value.values()) w.F32(static_cast<float>(v));
  }
  return out;
}

void ModelWeights::LoadValues(std::span<const uint8_t> archive) {
  const Parsed parsed = Parse(archive);
  if (parsed.entries.size() != params_.size()) {
    Fail(ErrorCode::kFormat, "weights archive has " + std::to_string(parsed.entries.size()) +
                                 " tensors, model expects " + std::to_string(params_.size()));
  }
  for (const Entry& e : parsed.entries) {
    auto it = by_name_.find(e.name);
    if (it == by_name_.end()) Fail(ErrorCode::kFormat, "unexpected tensor '" + e.name + "'");
    Parameter& p = *params_[it->second];
    if (p.value.shape() != e.shape) {
      Fail(ErrorCode::kFormat, "tensor '" + e.name + "' has shape mismatch with model");
    }
    ReadValues(parsed, e, p.value);
  }
  meta_ = parsed.meta;
}

ModelWeights ModelWeights::Deserialize(std::span<const uint8_t> archive) {
  const Parsed parsed = Parse(archive);
  ModelWeights w;
  w.meta_ = parsed.meta;
  for (const Entry& e : parsed.entries) {
    Parameter& p = w.Add(e.name, e.shape);
    ReadValues(parsed, e, p.value);
  }
  return w;
}

void ModelWeights::Save(const std::string& path) const {
  const Bytes data = Serialize();
  WriteFileBytes(path, data);
}

ModelWeights ModelWeights::Load(const std::string& path) {
  const Bytes data = ReadFileBytes(path);
  return Deserialize(data);
}

}  // namespace pointsoup::nn
