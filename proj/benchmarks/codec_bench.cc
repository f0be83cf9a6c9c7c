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

#include <benchmark/benchmark.h>

#include "pointsoup/codec/codec.h"
#include "pointsoup/train/synthetic.h"

namespace pointsoup::codec {
namespace {

const Model& SharedModel() {
  static const Model model = Model::Initialized(0);
  return model;
}

geom::PointCloud Sphere(size_t n) {
  train::SyntheticSpec spec;
  spec.points = n;
  return train::GenerateSynthetic(spec, 1);
}

void BM_Encode(benchmark::State& state) {
  const geom::PointCloud cloud = Sphere(1 << 15);
  CodecConfig config;
  config.window_size = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(Encode(cloud, config, SharedModel(), 2));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cloud.size()));
}
BENCHMARK(BM_Encode)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State& state) {
  const geom::PointCloud cloud = Sphere(1 << 15);
  CodecConfig config;
  config.window_size = state.range(0);
  const Bytes bytes = Encode(cloud, config, SharedModel(), 2).Serialize();
  for (auto _ : state) benchmark::DoNotOptimize(Decode(bytes, SharedModel()));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cloud.size()));
}
BENCHMARK(BM_Decode)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace pointsoup::codec

BENCHMARK_MAIN();
