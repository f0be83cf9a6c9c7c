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

#ifndef POINTSOUP_CODEC_CODEC_H_
#define POINTSOUP_CODEC_CODEC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pointsoup/base/bytes.h"
#include "pointsoup/codec/model.h"
#include "pointsoup/dwem/dwem.h"
#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::codec {

// Per-frame coding parameters. The window size K is the rate knob.
struct CodecConfig {
  int64_t window_size = 128;  // K
  int64_t dilated_size = 8;   // k
  int64_t ratio = 4;          // r
  size_t rps_factor = 16;
  int bone_bit_depth = 10;
  // Windows per batch in the network passes; bounds peak memory.
  int64_t batch_windows = 256;

  // Throws unless K lies in [16, R_max * r] and the rest is positive.
  void Validate(const ModelConfig& model) const;
};

// M = max(2, floor(2N / K)); throws if K > N.
size_t ChooseM(size_t n, int64_t k);
// R = max(1, floor(K / r)).
int64_t ChooseR(int64_t k, int64_t ratio = 4);

inline constexpr char kFrameMagic[4] = {'P', 'S', 'U', 'P'};
inline constexpr uint8_t kFrameVersion = 1;
inline constexpr size_t kFrameHeaderSize = 34;

struct FrameHeader {
  uint8_t version = kFrameVersion;
  uint8_t flags = 0;
  uint8_t bone_codec = 0;
  uint8_t bone_depth = 10;
  uint64_t n = 0;
  uint16_t k = 0;
  uint32_t m = 0;
  uint8_t c = 0;
  uint8_t u = 0;
  uint32_t bone_bytes = 0;
  uint32_t feature_bytes = 0;

  friend bool operator==(const FrameHeader&, const FrameHeader&) = default;
};

struct EncodedFrame {
  FrameHeader header;
  Bytes bones;
  Bytes features;

  size_t size() const { return kFrameHeaderSize + bones.size() + features.size(); }
  Bytes Serialize() const;
  // Strict parse; any violation throws kFormat.
  static EncodedFrame Parse(std::span<const uint8_t> bytes);

  friend bool operator==(const EncodedFrame&, const EncodedFrame&) = default;
};

// Laplacian parameters of every feature symbol, [M, c].
struct EntropyParams {
  nn::Tensor mu;
  nn::Tensor scale;
};

// Entropy parameters from the dilated windows of the decoded bones. Shared by
// the encoder and the decoder.
EntropyParams ComputeEntropyParams(const Model& model, const dwem::DilatedWindows& dw,
                                   int64_t batch_windows = 4096);

Bytes EncodeFeatureSymbols(std::span<const int32_t> symbols, const EntropyParams& params);
std::vector<int32_t> DecodeFeatureSymbols(std::span<const uint8_t> stream,
                                          const EntropyParams& params);

EncodedFrame Encode(const geom::PointCloud& cloud, const CodecConfig& config,
                    const Model& model, uint64_t seed);

// Decoder configuration beyond the header; only batching matters.
geom::PointCloud Decode(const EncodedFrame& frame, const Model& model,
                        int64_t batch_windows = 1024);
geom::PointCloud Decode(std::span<const uint8_t> bytes, const Model& model);

struct RateBreakdown {
  double total = 0.0;
  double header = 0.0;
  double bones = 0.0;
  double features = 0.0;
};

// Bits per input point of a frame, split by substream.
RateBreakdown BitsPerPoint(const EncodedFrame& frame);

// Farthest-point subsample when the cloud has more than n points, cyclic
// duplicate padding when it has fewer.
geom::PointCloud ResampleToCount(const geom::PointCloud& cloud, size_t n);

}  // namespace pointsoup::codec

#endif  // POINTSOUP_CODEC_CODEC_H_
