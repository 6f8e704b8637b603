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

#include "numcore/optim.hpp"

#include <cmath>

#include "common/error.hpp"

namespace mtcn::numcore {

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd" || name == "sgd-momentum") return OptimizerKind::sgd_momentum;
  if (name == "adam") return OptimizerKind::adam;
  throw InvalidArgument("unknown optimizer '" + name + "' (expected sgd-momentum or adam)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd-momentum"; }

Optimizer::Optimizer(ParamSet& params, OptimizerConfig config) : params_(params), config_(config) {
  for (const auto& e : params_.entries()) {
    first_.emplace_back(e.tensor.numel(), 0.0f);
    second_.emplace_back(config_.kind == OptimizerKind::adam ? e.tensor.numel() : 0, 0.0f);
  }
}

void Optimizer::step() {
  ++steps_;
  auto& entries = params_.entries();
  if (entries.size() != first_.size()) throw StateError("optimizer: parameter set changed after construction");
  const double bc1 = 1.0 - std::pow(static_cast<double>(config_.beta1), static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(static_cast<double>(config_.beta2), static_cast<double>(steps_));
  for (std::size_t p = 0; p < entries.size(); ++p) {
    auto& e = entries[p];
    if (!e.trainable) continue;
    if (!e.tensor.has_grad()) throw StateError("optimizer: trainable parameter '" + e.name + "' has no gradient");
    auto w = e.tensor.mutable_data();
    auto g = e.tensor.mutable_grad();
    auto& m = first_[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const float grad = g[i] + config_.weight_decay * w[i];
      if (config_.kind == OptimizerKind::sgd_momentum) {
        m[i] = config_.momentum * m[i] + grad;
        w[i] -= config_.lr * m[i];
      } else {
        auto& v = second_[p];
        m[i] = config_.beta1 * m[i] + (1.0f - config_.beta1) * grad;
        v[i] = config_.beta2 * v[i] + (1.0f - config_.beta2) * grad * grad;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        w[i] -= static_cast<float>(config_.lr * mhat / (std::sqrt(vhat) + config_.eps));
      }
    }
    std::fill(g.begin(), g.end(), 0.0f);
  }
}

}  // namespace mtcn::numcore
