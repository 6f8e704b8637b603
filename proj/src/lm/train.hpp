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

#include "data/store.hpp"
#include "data/windows.hpp"
#include "lm/model.hpp"
#include "numcore/optim.hpp"

namespace mtcn::lm {

LabelSeq window_labels(const data::FeatureStore& store, const data::ContextWindow& window);
std::vector<LabelSeq> window_corpus(const data::FeatureStore& store, std::span<const std::size_t> rows, std::size_t w,
                                    data::WindowMode mode);
// Full label sequence of every video touched by `rows`, in video order.
std::vector<LabelSeq> video_sequences(const data::FeatureStore& store, std::span<const std::size_t> rows);

struct LmTrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  numcore::OptimizerConfig optimizer{numcore::OptimizerKind::adam, 1e-3f, 0.9f, 0.0f};
  // Mask-predict-replace passes over each batch per epoch.
  std::size_t mask_rounds = 2;
  // Off: replacement always applied. On: replacement probability ramps linearly
  // from 0 to 1 over the epochs.
  bool replace_ramp = false;
  // Plateau decay on validation masked-target accuracy.
  std::size_t plateau_patience = 10;
  float plateau_factor = 0.1f;
  data::WindowMode mode = data::WindowMode::centre;
};

struct LmTrainLog {
  std::vector<float> epoch_loss;
  std::vector<float> val_accuracy;  // empty without validation windows
  std::vector<float> lr;
};

// One scheduled-sampling step. For each window a non-padding position is drawn
// uniformly and masked in the working copy; the loss is taken against the
// ground truth at that position, and afterwards (with probability
// replace_prob) the working copy's token there becomes the model's argmax.
struct ScheduledStep {
  float loss = 0.0f;
  std::vector<std::size_t> masked;
};
ScheduledStep train_step_scheduled(LmModel& model, numcore::Optimizer& opt, std::span<const LabelSeq> truth,
                                   std::span<LabelSeq> working, numcore::Rng& rng, float replace_prob = 1.0f);

// Fraction of windows whose masked target action is predicted exactly.
float masked_accuracy(const LmModel& model, std::span<const LabelSeq> windows, std::size_t target);

using LmEpochCallback = std::function<void(std::size_t epoch, float loss, float val_acc)>;

LmTrainLog train_lm(LmModel& model, std::span<const LabelSeq> train, std::span<const LabelSeq> val,
                    const LmTrainConfig& cfg, std::uint64_t seed, const LmEpochCallback& on_epoch = {});

}  // namespace mtcn::lm
