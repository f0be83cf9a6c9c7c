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

#ifndef POINTSOUP_TOOLS_COMMANDS_H_
#define POINTSOUP_TOOLS_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pointsoup/codec/codec.h"
#include "pointsoup/geom/normalize.h"
#include "pointsoup/geom/point_cloud.h"

namespace pointsoup::cli {

// Exit codes of the pointsoup tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitFormat = 4;
inline constexpr int kExitNumeric = 5;

int ExitCodeFor(ErrorCode code);

// Normalization sidecar written next to a frame: `<frame>.norm.json`.
std::string SidecarPath(const std::string& frame_path);
void WriteSidecar(const std::string& path, const geom::Normalization& n);
geom::Normalization ReadSidecar(const std::string& path);

// Loads a weights archive, or falls back to untrained seed-0 weights with a
// warning on `log` when `path` is empty.
codec::Model LoadModel(const std::string& path, std::ostream& log);

// Returns `seed` or draws a fresh one and logs it.
uint64_t ResolveSeed(const std::optional<uint64_t>& seed, std::ostream& log);

struct EncodeOptions {
  std::string input;
  std::string output;
  int64_t window_size = 128;
  std::string weights;
  std::optional<uint64_t> seed;
  bool normalize = false;
};

struct DecodeOptions {
  std::string input;
  std::string output;
  std::string weights;
  bool exact_n = false;
  bool denormalize = false;
  bool ascii = false;
};

struct EvalOptions {
  std::string reference;
  std::vector<std::string> frames;
  // Also encode the reference at each of these window sizes.
  std::vector<int64_t> window_sizes;
  std::string weights;
  std::optional<uint64_t> seed;
  std::string csv;  // empty: stdout
};

struct TrainOptions {
  std::string output;
  int64_t steps = 2000;
  double lambda = 1e-4;
  double learning_rate = 5e-4;
  int64_t window_size = 128;
  size_t min_points = 1024;
  size_t max_points = 4096;
  std::optional<uint64_t> seed;
  int64_t log_every = 50;
};

void RunEncode(const EncodeOptions& options, std::ostream& out, std::ostream& log);
void RunDecode(const DecodeOptions& options, std::ostream& out, std::ostream& log);
void RunEval(const EvalOptions& options, std::ostream& out, std::ostream& log);
void RunTrain(const TrainOptions& options, std::ostream& out, std::ostream& log);
void RunInfo(const std::string& path, std::ostream& out);

// One evaluated frame. Empty encode time means the frame was encoded
// elsewhere and the time is unknown.
struct EvalRow {
  std::string frame;
  codec::FrameHeader header;
  codec::RateBreakdown bpp;
  double chamfer = 0.0;
  double d1_psnr = 0.0;  // kInfinitePsnr for identical clouds
  std::optional<double> encode_ms;
  double decode_ms = 0.0;
};

inline constexpr int kEvalSchemaVersion = 1;

EvalRow MakeEvalRow(const std::string& frame, const codec::EncodedFrame& encoded,
                    const geom::PointCloud& reference, const geom::PointCloud& decoded);
std::string EvalCsvHeader();
std::string EvalCsvLine(const EvalRow& row);

}  // namespace pointsoup::cli

#endif  // POINTSOUP_TOOLS_COMMANDS_H_
