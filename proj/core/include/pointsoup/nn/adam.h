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

#ifndef POINTSOUP_NN_ADAM_H_
#define POINTSOUP_NN_ADAM_H_

#include <cstdint>
#include <vector>

#include "pointsoup/nn/weights.h"

namespace pointsoup::nn {

struct AdamOptions {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments are kept in double per parameter entry.
class Adam {
 public:
  explicit Adam(const ModelWeights& weights, AdamOptions options = {});

  // Applies one update from the gradients currently stored in `weights`.
  void Step(ModelWeights& weights);

  int64_t step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

 private:
  AdamOptions options_;
  int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace pointsoup::nn

#endif  // POINTSOUP_NN_ADAM_H_
