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

#include "pointsoup/codec/codec.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "pointsoup/awds/awds.h"
#include "pointsoup/base/error.h"
#include "pointsoup/base/parallel.h"
#include "pointsoup/coder/bone_codec.h"
#include "pointsoup/coder/range_coder.h"
#include "pointsoup/coder/symbol_model.h"
#include "pointsoup/dwus/dwus.h"
#include "pointsoup/geom/sampling.h"
#include "pointsoup/geom/spatial_index.h"
#include "pointsoup/nn/ops.h"

namespace pointsoup::codec {
namespace {

constexpr size_t kModelBlock = 4096;

void CopyRows(const nn::Tensor& src, nn::Tensor& dst, int64_t first_row) {
  std::copy(src.data(), src.data() + src.numel(), dst.data() + first_row * dst.cols());
}

std::string Str(uint64_t v) { return std::to_string(v); }

}  // namespace

void CodecConfig::Validate(const ModelConfig& model) const {
  const int64_t k_max = model.grid_rows * ratio;
  Require(window_size >= 16 && window_size <= k_max,
          "window size K=" + std::to_string(window_size) + " outside [16, " +
              std::to_string(k_max) + "]");
  Require(window_size <= 65535, "window size must fit 16 bits");
  Require(dilated_size >= 1 && ratio >= 1 && rps_factor >= 1 && batch_windows >= 1,
          "codec configuration values must be positive");
  Require(bone_bit_depth >= 1 && bone_bit_depth <= 21, "bone bit depth must be in [1, 21]");
  Require(model.compact_channels <= 255 && model.points_per_row <= 255,
          "c and u must fit one byte");
}

size_t ChooseM(size_t n, int64_t k) {
  Require(k >= 1, "window size must be positive");
  Require(static_cast<uint64_t>(k) <= n,
          "K exceeds point count (K=" + std::to_string(k) + ", N=" + Str(n) + ")");
  return awds::BoneCount(n, static_cast<size_t>(k));
}

int64_t ChooseR(int64_t k, int64_t ratio) { return dwus::GridRows(k, ratio); }

Bytes EncodedFrame::Serialize() const {
  Bytes out;
  out.reserve(size());
  ByteWriter w(&out);
  for (char ch : kFrameMagic) w.U8(static_cast<uint8_t>(ch));
  w.U8(header.version);
  w.U8(header.flags);
  w.U8(header.bone_codec);
  w.U8(header.bone_depth);
  w.U64(header.n);
  w.U16(header.k);
  w.U32(header.m);
  w.U8(header.c);
  w.U8(header.u);
  w.U16(0);
  w.U32(static_cast<uint32_t>(bones.size()));
  w.U32(static_cast<uint32_t>(features.size()));
  w.Raw(bones);
  w.Raw(features);
  return out;
}

EncodedFrame EncodedFrame::Parse(std::span<const uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize) {
    Fail(ErrorCode::kFormat, "frame: " + Str(bytes.size()) + " bytes is shorter than the " +
                                 Str(kFrameHeaderSize) + "-byte header");
  }
  ByteReader r(bytes);
  if (std::memcmp(bytes.data(), kFrameMagic, 4) != 0) {
    Fail(ErrorCode::kFormat, "frame: bad magic, not a pointsoup frame");
  }
  r.Raw(4);
  EncodedFrame f;
  FrameHeader& h = f.header;
  h.version = r.U8();
  h.flags = r.U8();
  h.bone_codec = r.U8();
  h.bone_depth = r.U8();
  h.n = r.U64();
  h.k = r.U16();
  h.m = r.U32();
  h.c = r.U8();
  h.u = r.U8();
  const uint16_t reserved = r.U16();
  h.bone_bytes = r.U32();
  h.feature_bytes = r.U32();
  if (h.version != kFrameVersion) {
    Fail(ErrorCode::kFormat, "frame: unsupported version " + Str(h.version));
  }
  if (h.flags != 0 || reserved != 0) Fail(ErrorCode::kFormat, "frame: unknown flags set");
  if (h.bone_codec != coder::kMortonDeltaBoneCodec) {
    Fail(ErrorCode::kFormat, "frame: unknown bone codec " + Str(h.bone_codec));
  }
  if (h.bone_depth < 1 || h.bone_depth > 21) {
    Fail(ErrorCode::kFormat, "frame: invalid bone bit depth " + Str(h.bone_depth));
  }
  if (h.k < 1 || h.n < h.k) {
    Fail(ErrorCode::kFormat, "frame: invalid N=" + Str(h.n) + ", K=" + Str(h.k));
  }
  if (h.m != awds::BoneCount(h.n, h.k)) {
    Fail(ErrorCode::kFormat, "frame: M=" + Str(h.m) + " does not match floor(2N/K) for N=" +
                                 Str(h.n) + ", K=" + Str(h.k));
  }
  if (h.c < 1 || h.u < 1) Fail(ErrorCode::kFormat, "frame: c and u must be positive");
  const uint64_t payload = uint64_t{h.bone_bytes} + h.feature_bytes;
  if (payload != r.remaining()) {
    Fail(ErrorCode::kFormat, "frame: substream lengths (" + Str(h.bone_bytes) + " + " +
                                 Str(h.feature_bytes) + ") do not match the " +
                                 Str(r.remaining()) + "-byte payload");
  }
  const auto bone_span = r.Raw(h.bone_bytes);
  const auto feature_span = r.Raw(h.feature_bytes);
  f.bones.assign(bone_span.begin(), bone_span.end());
  f.features.assign(feature_span.begin(), feature_span.end());
  return f;
}

EntropyParams ComputeEntropyParams(const Model& model, const dwem::DilatedWindows& dw,
                                   int64_t batch_windows) {
  const int64_t c = model.config().compact_channels;
  EntropyParams p{nn::Tensor({dw.count, c}), nn::Tensor({dw.count, c})};
  for (int64_t b = 0; b < dw.count; b += batch_windows) {
    const int64_t e = std::min(dw.count, b + batch_windows);
    const dwem::LaplaceVars v = model.dwem().EstimateParams(dw, b, e);
    CopyRows(v.mu.value(), p.mu, b);
    CopyRows(v.scale.value(), p.scale, b);
  }
  if (!p.mu.AllFinite() || !p.scale.AllFinite()) {
    Fail(ErrorCode::kNumeric, "entropy model produced non-finite parameters");
  }
  return p;
}

Bytes EncodeFeatureSymbols(std::span<const int32_t> symbols, const EntropyParams& params) {
  Require(static_cast<int64_t>(symbols.size()) == params.mu.numel(),
          "feature symbols do not match the entropy parameters");
  coder::RangeEncoder enc;
  std::vector<coder::IntegerModel> models(kModelBlock);
  for (size_t start = 0; start < symbols.size(); start += kModelBlock) {
    const size_t end = std::min(symbols.size(), start + kModelBlock);
    ParallelFor(end - start, 64, [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        models[i] = coder::MakeLaplaceModel(params.mu[start + i], params.scale[start + i]);
      }
    });
    for (size_t i = start; i < end; ++i) coder::EncodeInteger(enc, models[i - start], symbols[i]);
  }
  return enc.Finish();
}

std::vector<int32_t> DecodeFeatureSymbols(std::span<const uint8_t> stream,
                                          const EntropyParams& params) {
  const auto count = static_cast<size_t>(params.mu.numel());
  std::vector<int32_t> out(count);
  coder::RangeDecoder dec(stream);
  std::vector<coder::IntegerModel> models(kModelBlock);
  for (size_t start = 0; start < count; start += kModelBlock) {
    const size_t end = std::min(count, start + kModelBlock);
    ParallelFor(end - start, 64, [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        models[i] = coder::MakeLaplaceModel(params.mu[start + i], params.scale[start + i]);
      }
    });
    for (size_t i = start; i < end; ++i) out[i] = coder::DecodeInteger(dec, models[i - start]);
  }
  return out;
}

EncodedFrame Encode(const geom::PointCloud& cloud, const CodecConfig& config,
                    const Model& model, uint64_t seed) {
  const ModelConfig& mc = model.config();
  config.Validate(mc);
  cloud.Validate();
  if (!cloud.OnGrid(config.bone_bit_depth)) {
    Fail(ErrorCode::kInvalidArgument,
         "encode: coordinates must be integers in [0, " +
             Str((uint64_t{1} << config.bone_bit_depth) - 1) + "]; normalize the cloud first");
  }
  const int64_t k = config.window_size;
  const size_t m = ChooseM(cloud.size(), k);

  const awds::Bones sampled = awds::SampleBones(cloud, m, seed, config.rps_factor);
  const coder::BoneStream bone_stream = coder::EncodeBones(sampled.points, config.bone_bit_depth);
  // Condition everything on the decoded bones, as the decoder will.
  const awds::Bones bones = awds::MakeBones(coder::DecodeBones(bone_stream.bytes));

  const geom::SpatialIndex index(cloud);
  const awds::AlignedWindowSet windows = awds::BuildAlignedWindows(cloud, index, bones, k);
  nn::Tensor f({static_cast<int64_t>(m), mc.compact_channels});
  for (int64_t b = 0; b < windows.count; b += config.batch_windows) {
    const int64_t e = std::min(windows.count, b + config.batch_windows);
    const nn::Var skin = model.awds().Forward(windows, b, e);
    CopyRows(model.dwem().Compact(skin).value(), f, b);
  }
  if (!f.AllFinite()) Fail(ErrorCode::kNumeric, "encode: non-finite skin features");
  const std::vector<int32_t> q = dwem::Quantize(f);

  const dwem::DilatedWindows dw = dwem::BuildDilatedWindows(bones, config.dilated_size);
  const EntropyParams params = ComputeEntropyParams(model, dw);

  EncodedFrame frame;
  frame.bones = bone_stream.bytes;
  frame.features = EncodeFeatureSymbols(q, params);
  FrameHeader& h = frame.header;
  h.bone_codec = coder::kMortonDeltaBoneCodec;
  h.bone_depth = static_cast<uint8_t>(config.bone_bit_depth);
  h.n = cloud.size();
  h.k = static_cast<uint16_t>(k);
  h.m = static_cast<uint32_t>(m);
  h.c = static_cast<uint8_t>(mc.compact_channels);
  h.u = static_cast<uint8_t>(mc.points_per_row);
  h.bone_bytes = static_cast<uint32_t>(frame.bones.size());
  h.feature_bytes = static_cast<uint32_t>(frame.features.size());
  return frame;
}

geom::PointCloud Decode(const EncodedFrame& frame, const Model& model,
                        int64_t batch_windows) {
  const FrameHeader& h = frame.header;
  const ModelConfig& mc = model.config();
  if (h.c != mc.compact_channels || h.u != mc.points_per_row) {
    Fail(ErrorCode::kFormat, "frame was encoded with c=" + Str(h.c) + ", u=" + Str(h.u) +
                                 " but the model has c=" + Str(mc.compact_channels) +
                                 ", u=" + Str(mc.points_per_row));
  }
  CodecConfig config;
  config.window_size = h.k;
  if (h.k < 16 || h.k > mc.grid_rows * config.ratio) {
    Fail(ErrorCode::kFormat, "frame: K=" + Str(h.k) + " is outside the model's range");
  }
  if (frame.bones.size() < 5 || frame.bones[4] != h.bone_depth) {
    Fail(ErrorCode::kFormat, "frame: bone stream bit depth disagrees with the header");
  }
  std::vector<geom::Vec3> decoded = coder::DecodeBones(frame.bones);
  if (decoded.size() != h.m) {
    Fail(ErrorCode::kFormat, "frame: bone stream holds " + Str(decoded.size()) +
                                 " bones, header says " + Str(h.m));
  }
  const awds::Bones bones = awds::MakeBones(std::move(decoded));
  const dwem::DilatedWindows dw = dwem::BuildDilatedWindows(bones, config.dilated_size);
  const EntropyParams params = ComputeEntropyParams(model, dw);
  const std::vector<int32_t> q = DecodeFeatureSymbols(frame.features, params);

  nn::Tensor f({static_cast<int64_t>(h.m), mc.compact_channels});
  for (size_t i = 0; i < q.size(); ++i) f[static_cast<int64_t>(i)] = static_cast<nn::Real>(q[i]);
  const nn::Var skin = model.dwem().Stretch(nn::Constant(std::move(f)));
  const nn::Tensor refined = model.dwus().Refine(skin, dw).value();

  const int64_t r = ChooseR(h.k, config.ratio);
  const int64_t per_window = r * mc.points_per_row;
  const std::vector<int32_t> one = dwus::SelectRows(r, mc.grid_rows, dwus::FoldMode::kInfer, nullptr);
  std::vector<geom::Vec3> points;
  points.reserve(static_cast<size_t>(h.m) * per_window);
  for (int64_t b = 0; b < dw.count; b += batch_windows) {
    const int64_t e = std::min(dw.count, b + batch_windows);
    nn::Tensor batch({e - b, mc.channels});
    std::copy(refined.data() + b * mc.channels, refined.data() + e * mc.channels, batch.data());
    std::vector<int32_t> rows;
    rows.reserve(static_cast<size_t>((e - b) * r));
    for (int64_t w = b; w < e; ++w) rows.insert(rows.end(), one.begin(), one.end());
    const nn::Var aligned = model.dwus().Fold(nn::Constant(std::move(batch)), rows, r);
    const geom::PointCloud part = dwus::InverseAlign(
        aligned.value(), std::span(bones.points).subspan(b, e - b), bones.density, per_window);
    points.insert(points.end(), part.points().begin(), part.points().end());
  }
  geom::PointCloud out(std::move(points));
  for (const geom::Vec3& p : out.points()) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
      Fail(ErrorCode::kNumeric, "decode: non-finite output coordinates");
    }
  }
  return out;
}

geom::PointCloud Decode(std::span<const uint8_t> bytes, const Model& model) {
  return Decode(EncodedFrame::Parse(bytes), model);
}

RateBreakdown BitsPerPoint(const EncodedFrame& frame) {
  Require(frame.header.n >= 1, "bits per point: frame has no points");
  const double n = static_cast<double>(frame.header.n);
  RateBreakdown r;
  r.header = 8.0 * kFrameHeaderSize / n;
  r.bones = 8.0 * static_cast<double>(frame.bones.size()) / n;
  r.features = 8.0 * static_cast<double>(frame.features.size()) / n;
  r.total = 8.0 * static_cast<double>(frame.size()) / n;
  return r;
}

geom::PointCloud ResampleToCount(const geom::PointCloud& cloud, size_t n) {
  Require(!cloud.empty() && n >= 1, "resample: need a non-empty cloud and a positive count");
  if (cloud.size() == n) return cloud;
  std::vector<geom::Vec3> pts;
  pts.reserve(n);
  if (cloud.size() > n) {
    for (int32_t i : geom::FarthestPointSample(cloud, n)) pts.push_back(cloud[i]);
  } else {
    pts.assign(cloud.points().begin(), cloud.points().end());
    for (size_t i = cloud.size(); i < n; ++i) pts.push_back(cloud[i % cloud.size()]);
  }
  return geom::PointCloud(std::move(pts));
}

}  // namespace pointsoup::codec
