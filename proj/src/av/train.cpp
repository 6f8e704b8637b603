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

#include "av/train.hpp"

#include <algorithm>
#include <numeric>

#include "common/error.hpp"

namespace mtcn::av {

using namespace numcore;

float train_step(AvModel& model, Optimizer& opt, const data::FeatureStore& store,
                 std::span<const data::ContextWindow> batch, float mixup_alpha, Rng& rng) {
  if (batch.empty()) throw InvalidArgument("av: empty batch");
  auto in = build_input(store, batch, model.config(), ClipPolicy::sampled, &rng);
  auto targets = build_targets(store, batch, model.config());
  mixup(in, targets, mixup_alpha, rng);
  const AvOutput out = model.forward(in, true, rng, model.config().beta < 1.0f);
  const Tensor loss = model.loss(out, targets);
  backward(loss);
  opt.step();
  return loss.item();
}

AvTrainLog train_av(AvModel& model, const data::FeatureStore& store, std::span<const std::size_t> train_rows,
                    const AvTrainConfig& cfg, std::uint64_t seed, const EpochCallback& on_epoch) {
  if (train_rows.empty()) throw InvalidArgument("av: no training rows");
  if (cfg.batch_size == 0) throw InvalidArgument("av: batch size must be positive");
  Rng rng(seed);
  Optimizer opt(model.params(), cfg.optimizer);
  std::vector<std::size_t> order(train_rows.begin(), train_rows.end());
  AvTrainLog log;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    float lr = cfg.optimizer.lr;
    for (auto m : cfg.lr_milestones)
      if (epoch >= m) lr *= cfg.lr_gamma;
    opt.set_lr(lr);
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<data::ContextWindow> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i)
        batch.push_back(data::make_window(store, order[i], model.config().window, cfg.mode));
      const float l = train_step(model, opt, store, batch, cfg.mixup_alpha, rng);
      log.step_loss.push_back(l);
      total += l;
      ++steps;
    }
    log.epoch_loss.push_back(static_cast<float>(total / steps));
    if (on_epoch) on_epoch(epoch, log.epoch_loss.back());
  }
  return log;
}

}  // namespace mtcn::av
