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

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "av/batch.hpp"
#include "av/model.hpp"
#include "data/store.hpp"
#include "data/windows.hpp"
#include "numcore/optim.hpp"

namespace mtcn::av {

struct AvTrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  numcore::OptimizerConfig optimizer{numcore::OptimizerKind::sgd_momentum, 0.01f, 0.9f, 5e-4f};
  std::vector<std::size_t> lr_milestones = {50, 75};
  float lr_gamma = 0.1f;
  float mixup_alpha = 0.2f;
  data::WindowMode mode = data::WindowMode::centre;
};

struct AvTrainLog {
  std::vector<float> step_loss;
  std::vector<float> epoch_loss;
};

// Samples clips, applies mixup, runs forward/backward and one optimizer step.
float train_step(AvModel& model, numcore::Optimizer& opt, const data::FeatureStore& store,
                 std::span<const data::ContextWindow> batch, float mixup_alpha, numcore::Rng& rng);

using EpochCallback = std::function<void(std::size_t epoch, float mean_loss)>;

AvTrainLog train_av(AvModel& model, const data::FeatureStore& store, std::span<const std::size_t> train_rows,
                    const AvTrainConfig& cfg, std::uint64_t seed, const EpochCallback& on_epoch = {});

}  // namespace mtcn::av
