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

#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ply.h"
#include "pointsoup/base/error.h"
#include "pointsoup/base/parallel.h"
#include "pointsoup/geom/metrics.h"
#include "pointsoup/nn/weights.h"
#include "pointsoup/train/trainer.h"

namespace pointsoup::cli {
namespace {

constexpr int kBitDepth = 10;

std::string Number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Fixed(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double MillisSince(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool StartsWith(const Bytes& bytes, std::string_view magic) {
  return bytes.size() >= magic.size() &&
         std::equal(magic.begin(), magic.end(), bytes.begin(),
                    [](char a, uint8_t b) { return static_cast<uint8_t>(a) == b; });
}

void PrintRates(const codec::EncodedFrame& frame, std::ostream& out) {
  const codec::RateBreakdown r = codec::BitsPerPoint(frame);
  out << "bpp_total: " << Fixed(r.total, 6) << "\n"
      << "bpp_header: " << Fixed(r.header, 6) << "\n"
      << "bpp_bones: " << Fixed(r.bones, 6) << "\n"
      << "bpp_features: " << Fixed(r.features, 6) << "\n";
}

// Brings the reference into the frame's grid coordinates.
geom::PointCloud ReferenceOnGrid(const geom::PointCloud& reference,
                                 const std::string& frame_path) {
  if (reference.OnGrid(kBitDepth)) return reference;
  const std::string sidecar = SidecarPath(frame_path);
  if (!std::filesystem::exists(sidecar)) {
    Fail(ErrorCode::kInvalidArgument,
         "eval: reference is not on the 10-bit grid and " + frame_path +
             " has no normalization sidecar");
  }
  return geom::Normalize(reference, ReadSidecar(sidecar));
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return kExitUsage;
    case ErrorCode::kIo:
      return kExitIo;
    case ErrorCode::kFormat:
      return kExitFormat;
    case ErrorCode::kNumeric:
      return kExitNumeric;
  }
  return kExitNumeric;
}

std::string SidecarPath(const std::string& frame_path) { return frame_path + ".norm.json"; }

void WriteSidecar(const std::string& path, const geom::Normalization& n) {
  const nlohmann::json j = {
      {"format", "pointsoup-normalization"},
      {"offset", {n.offset[0], n.offset[1], n.offset[2]}},
      {"scale", n.scale},
      {"bit_depth", n.bit_depth},
  };
  const std::string text = j.dump(2) + "\n";
  WriteFileBytes(path, Bytes(text.begin(), text.end()));
}

geom::Normalization ReadSidecar(const std::string& path) {
  const Bytes bytes = ReadFileBytes(path);
  geom::Normalization n;
  try {
    const nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end());
    if (j.at("format") != "pointsoup-normalization") throw std::runtime_error("wrong format");
    for (int a = 0; a < 3; ++a) n.offset[a] = j.at("offset").at(a).get<double>();
    n.scale = j.at("scale").get<double>();
    n.bit_depth = j.at("bit_depth").get<int>();
  } catch (const std::exception& e) {
    Fail(ErrorCode::kFormat, path + ": bad normalization sidecar (" + e.what() + ")");
  }
  if (!(n.scale > 0.0) || !std::isfinite(n.scale)) {
    Fail(ErrorCode::kFormat, path + ": normalization scale must be positive");
  }
  return n;
}

codec::Model LoadModel(const std::string& path, std::ostream& log) {
  if (path.empty()) {
    log << "warning: no --weights given; using untrained seed-0 weights\n";
    return codec::Model::Initialized(0);
  }
  return codec::Model::Load(path);
}

uint64_t ResolveSeed(const std::optional<uint64_t>& seed, std::ostream& log) {
  if (seed) return *seed;
  std::random_device device;
  const uint64_t drawn = (static_cast<uint64_t>(device()) << 32) | device();
  log << "seed: " << drawn << "\n";
  return drawn;
}

void RunEncode(const EncodeOptions& options, std::ostream& out, std::ostream& log) {
  geom::PointCloud cloud = ReadPly(options.input);
  const std::string sidecar = SidecarPath(options.output);
  std::optional<geom::Normalization> norm;
  if (options.normalize) {
    norm = geom::FitNormalization(cloud, kBitDepth);
    cloud = geom::Normalize(cloud, *norm);
  } else if (!cloud.OnGrid(kBitDepth)) {
    Fail(ErrorCode::kInvalidArgument,
         "encode: input is not on the 10-bit integer grid; pass --normalize");
  }
  const codec::Model model = LoadModel(options.weights, log);
  codec::CodecConfig config;
  config.window_size = options.window_size;
  const uint64_t seed = ResolveSeed(options.seed, log);
  const codec::EncodedFrame frame = codec::Encode(cloud, config, model, seed);
  WriteFileBytes(options.output, frame.Serialize());
  if (norm) {
    WriteSidecar(sidecar, *norm);
  } else {
    // A sidecar left over from an earlier normalized encode would be wrong now.
    std::filesystem::remove(sidecar);
  }
  out << "n: " << frame.header.n << "\n"
      << "k: " << frame.header.k << "\n"
      << "m: " << frame.header.m << "\n"
      << "bytes: " << frame.size() << "\n";
  PrintRates(frame, out);
}

void RunDecode(const DecodeOptions& options, std::ostream& out, std::ostream& log) {
  const Bytes bytes = ReadFileBytes(options.input);
  const codec::EncodedFrame frame = codec::EncodedFrame::Parse(bytes);
  const codec::Model model = LoadModel(options.weights, log);
  geom::PointCloud cloud = codec::Decode(frame, model);
  if (options.exact_n) cloud = codec::ResampleToCount(cloud, frame.header.n);
  if (options.denormalize) {
    cloud = geom::Denormalize(cloud, ReadSidecar(SidecarPath(options.input)));
  }
  WritePly(cloud, options.output,
           options.ascii ? PlyFormat::kAscii : PlyFormat::kBinaryLittleEndian);
  out << "points: " << cloud.size() << "\n";
}

EvalRow MakeEvalRow(const std::string& frame, const codec::EncodedFrame& encoded,
                    const geom::PointCloud& reference, const geom::PointCloud& decoded) {
  EvalRow row;
  row.frame = frame;
  row.header = encoded.header;
  row.bpp = codec::BitsPerPoint(encoded);
  row.chamfer = geom::ChamferDistance(reference, decoded);
  row.d1_psnr = geom::D1Psnr(reference, decoded);
  return row;
}

std::string EvalCsvHeader() {
  return "schema_version,frame,n,k,m,bpp_total,bpp_header,bpp_bones,bpp_features,"
         "chamfer,d1_psnr,encode_ms,decode_ms";
}

std::string EvalCsvLine(const EvalRow& row) {
  std::ostringstream s;
  s << kEvalSchemaVersion << "," << row.frame << "," << row.header.n << "," << row.header.k
    << "," << row.header.m << "," << Number(row.bpp.total) << "," << Number(row.bpp.header)
    << "," << Number(row.bpp.bones) << "," << Number(row.bpp.features) << ","
    << Number(row.chamfer) << "," << Number(row.d1_psnr) << ","
    << (row.encode_ms ? Fixed(*row.encode_ms, 3) : "") << "," << Fixed(row.decode_ms, 3);
  return s.str();
}

void RunEval(const EvalOptions& options, std::ostream& out, std::ostream& log) {
  const geom::PointCloud reference = ReadPly(options.reference);
  std::vector<EvalRow> rows(options.frames.size() + options.window_sizes.size());
  if (!rows.empty()) {
    const codec::Model model = LoadModel(options.weights, log);
    // Frame files are independent, so they are evaluated concurrently.
    ParallelFor(options.frames.size(), 1, [&](size_t lo, size_t hi) {
      for (size_t i = lo; i < hi; ++i) {
        const std::string& path = options.frames[i];
        const codec::EncodedFrame frame = codec::EncodedFrame::Parse(ReadFileBytes(path));
        const geom::PointCloud ref = ReferenceOnGrid(reference, path);
        if (ref.size() != frame.header.n) {
          Fail(ErrorCode::kInvalidArgument,
               "eval: mismatched reference: " + std::to_string(ref.size()) +
                   " points, but " + path + " encodes " + std::to_string(frame.header.n));
        }
        const auto t0 = std::chrono::steady_clock::now();
        const geom::PointCloud decoded = codec::Decode(frame, model);
        const double decode_ms = MillisSince(t0);
        rows[i] = MakeEvalRow(path, frame, ref, decoded);
        rows[i].decode_ms = decode_ms;
      }
    });
    if (!options.window_sizes.empty()) {
      geom::PointCloud ref = reference;
      if (!ref.OnGrid(kBitDepth)) ref = geom::Normalize(ref, geom::FitNormalization(ref));
      const uint64_t seed = ResolveSeed(options.seed, log);
      for (size_t j = 0; j < options.window_sizes.size(); ++j) {
        codec::CodecConfig config;
        config.window_size = options.window_sizes[j];
        auto t0 = std::chrono::steady_clock::now();
        const codec::EncodedFrame frame = codec::Encode(ref, config, model, seed);
        const double encode_ms = MillisSince(t0);
        t0 = std::chrono::steady_clock::now();
        const geom::PointCloud decoded = codec::Decode(frame, model);
        const double decode_ms = MillisSince(t0);
        EvalRow& row = rows[options.frames.size() + j];
        row = MakeEvalRow("K=" + std::to_string(config.window_size), frame, ref, decoded);
        row.encode_ms = encode_ms;
        row.decode_ms = decode_ms;
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const EvalRow& a, const EvalRow& b) { return a.bpp.total < b.bpp.total; });
  std::ostringstream csv;
  csv << EvalCsvHeader() << "\n";
  for (const EvalRow& row : rows) csv << EvalCsvLine(row) << "\n";
  if (options.csv.empty()) {
    out << csv.str();
  } else {
    const std::string text = csv.str();
    WriteFileBytes(options.csv, Bytes(text.begin(), text.end()));
  }
}

void RunTrain(const TrainOptions& options, std::ostream& out, std::ostream& log) {
  Require(!options.output.empty(), "train: --out is required");
  Require(options.log_every >= 1, "train: --log-every must be positive");
  train::TrainConfig config;
  config.steps = options.steps;
  config.lambda = options.lambda;
  config.learning_rate = options.learning_rate;
  config.window_size = options.window_size;
  config.min_points = options.min_points;
  config.max_points = options.max_points;
  config.seed = ResolveSeed(options.seed, log);
  config.Validate();
  codec::Model model = codec::Model::Initialized(config.seed);
  train::Trainer trainer(model, config);
  out << "parameters: " << model.weights().TotalCount() << "\n";
  for (int64_t s = 0; s < config.steps; ++s) {
    const train::StepMetrics m = trainer.Step();
    if (m.step == 1 || m.step % options.log_every == 0 || m.step == config.steps) {
      out << "step " << m.step << " chamfer " << Fixed(m.chamfer, 4) << " rate "
          << Fixed(m.rate, 4) << " loss " << Fixed(m.loss, 4) << "\n";
      out.flush();
    }
  }
  trainer.SaveCheckpoint(options.output);
  out << "weights: " << options.output << " (" << std::filesystem::file_size(options.output)
      << " bytes)\n";
}

void RunInfo(const std::string& path, std::ostream& out) {
  const Bytes bytes = ReadFileBytes(path);
  if (StartsWith(bytes, std::string_view(codec::kFrameMagic, 4))) {
    const codec::EncodedFrame frame = codec::EncodedFrame::Parse(bytes);
    const codec::FrameHeader& h = frame.header;
    out << "type: frame\n"
        << "version: " << int{h.version} << "\n"
        << "n: " << h.n << "\n"
        << "k: " << h.k << "\n"
        << "m: " << h.m << "\n"
        << "c: " << int{h.c} << "\n"
        << "u: " << int{h.u} << "\n"
        << "bone_codec: " << int{h.bone_codec} << "\n"
        << "bone_depth: " << int{h.bone_depth} << "\n"
        << "header_bytes: " << codec::kFrameHeaderSize << "\n"
        << "bone_bytes: " << frame.bones.size() << "\n"
        << "feature_bytes: " << frame.features.size() << "\n"
        << "total_bytes: " << bytes.size() << "\n";
    PrintRates(frame, out);
    return;
  }
  if (StartsWith(bytes, "PSWT")) {
    const codec::Model model = codec::Model::FromArchive(bytes);
    out << "type: weights\n"
        << "parameters: " << model.weights().TotalCount() << "\n"
        << "tensors: " << model.weights().parameters().size() << "\n"
        << "total_bytes: " << bytes.size() << "\n"
        << "config: " << model.config().ToJson() << "\n";
    const std::string sidecar = path + ".json";
    if (std::filesystem::exists(sidecar)) {
      const Bytes text = ReadFileBytes(sidecar);
      try {
        const nlohmann::json j = nlohmann::json::parse(text.begin(), text.end());
        out << "trained_steps: " << j.at("steps").get<int64_t>() << "\n";
      } catch (const std::exception& e) {
        Fail(ErrorCode::kFormat, sidecar + ": bad checkpoint sidecar (" + e.what() + ")");
      }
    }
    return;
  }
  if (StartsWith(bytes, "ply")) {
    const geom::PointCloud cloud = ParsePly(bytes);
    out << "type: ply\n"
        << "points: " << cloud.size() << "\n";
    if (!cloud.empty()) {
      const geom::Bounds b = cloud.ComputeBounds();
      out << "min: " << b.min[0] << " " << b.min[1] << " " << b.min[2] << "\n"
          << "max: " << b.max[0] << " " << b.max[1] << " " << b.max[2] << "\n";
    }
    out << "on_grid: " << (cloud.OnGrid(kBitDepth) ? "yes" : "no") << "\n";
    return;
  }
  Fail(ErrorCode::kFormat, path + ": not a frame, weights archive or PLY file");
}

}  // namespace pointsoup::cli
