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

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "pointsoup/base/error.h"

namespace {

using pointsoup::cli::kExitUsage;

void AddSeed(CLI::App* cmd, std::optional<uint64_t>& seed) {
  cmd->add_option("--seed", seed, "Random seed (default: drawn and logged)");
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = pointsoup::cli;
  CLI::App app{"pointsoup: learned point cloud geometry codec"};
  app.require_subcommand(1);
  int threads = -1;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); sets POINTSOUP_THREADS")
      ->check(CLI::NonNegativeNumber);

  cli::EncodeOptions enc;
  CLI::App* encode = app.add_subcommand("encode", "Compress a PLY point cloud");
  encode->add_option("input", enc.input, "Input PLY")->required();
  encode->add_option("output", enc.output, "Output frame (.psup)")->required();
  encode->add_option("-k,--window-size", enc.window_size, "Window size K (rate knob)");
  encode->add_option("--weights", enc.weights, "Weights archive");
  encode->add_flag("--normalize", enc.normalize,
                   "Map the input onto the 10-bit grid and write a sidecar");
  AddSeed(encode, enc.seed);

  cli::DecodeOptions dec;
  CLI::App* decode = app.add_subcommand("decode", "Reconstruct a PLY point cloud");
  decode->add_option("input", dec.input, "Input frame (.psup)")->required();
  decode->add_option("output", dec.output, "Output PLY")->required();
  decode->add_option("--weights", dec.weights, "Weights archive");
  decode->add_flag("--exact-n", dec.exact_n, "Resample to the encoded point count");
  decode->add_flag("--denormalize", dec.denormalize,
                   "Map back to input coordinates using the frame's sidecar");
  decode->add_flag("--ascii", dec.ascii, "Write ascii PLY");

  cli::EvalOptions ev;
  CLI::App* eval = app.add_subcommand("eval", "Rate-distortion report as CSV");
  eval->add_option("reference", ev.reference, "Reference PLY")->required();
  eval->add_option("frames", ev.frames, "Frames encoded from the reference");
  eval->add_option("--window-sizes", ev.window_sizes,
                   "Also encode the reference at these window sizes")
      ->delimiter(',');
  eval->add_option("--weights", ev.weights, "Weights archive");
  eval->add_option("--csv", ev.csv, "Write the CSV here instead of stdout");
  AddSeed(eval, ev.seed);

  cli::TrainOptions tr;
  CLI::App* train = app.add_subcommand("train", "Train weights on synthetic shapes");
  train->add_option("--out", tr.output, "Output weights archive")->required();
  train->add_option("--steps", tr.steps, "Optimization steps");
  train->add_option("--lambda", tr.lambda, "Rate weight");
  train->add_option("--lr", tr.learning_rate, "Adam learning rate");
  train->add_option("-k,--window-size", tr.window_size, "Training window size");
  train->add_option("--min-points", tr.min_points, "Smallest synthetic cloud");
  train->add_option("--max-points", tr.max_points, "Largest synthetic cloud");
  train->add_option("--log-every", tr.log_every, "Metric print interval");
  AddSeed(train, tr.seed);

  std::string info_path;
  CLI::App* info = app.add_subcommand("info", "Describe a frame, weights archive or PLY");
  info->add_option("path", info_path, "File to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  if (threads >= 0) setenv("POINTSOUP_THREADS", std::to_string(threads).c_str(), 1);

  try {
    if (*encode) cli::RunEncode(enc, std::cout, std::cerr);
    if (*decode) cli::RunDecode(dec, std::cout, std::cerr);
    if (*eval) cli::RunEval(ev, std::cout, std::cerr);
    if (*train) cli::RunTrain(tr, std::cout, std::cerr);
    if (*info) cli::RunInfo(info_path, std::cout);
  } catch (const pointsoup::Error& e) {
    std::cerr << "error: " << pointsoup::ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return cli::ExitCodeFor(e.code());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: numeric: out of memory\n";
    return cli::kExitNumeric;
  }
  return cli::kExitOk;
}
