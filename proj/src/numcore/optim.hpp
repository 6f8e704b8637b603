// Copyright 2026 The MTCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "numcore/params.hpp"

namespace mtcn::numcore {

enum class OptimizerKind { sgd_momentum, adam };

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::sgd_momentum;
  float lr = 0.01f;
  float momentum = 0.9f;
  // L2 term added to the gradient before the update rule.
  float weight_decay = 0.0f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

class Optimizer {
 public:
  Optimizer(ParamSet& params, OptimizerConfig config);

  // Applies one update to every trainable parameter, then zeroes gradients.
  void step();

  float lr() const { return config_.lr; }
  void set_lr(float lr) { config_.lr = lr; }
  const OptimizerConfig& config() const { return config_; }

 private:
  ParamSet& params_;
  OptimizerConfig config_;
  std::vector<std::vector<float>> first_;
  std::vector<std::vector<float>> second_;
  long steps_ = 0;
};

}  // namespace mtcn::numcore
