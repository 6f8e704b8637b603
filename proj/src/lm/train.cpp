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

#include "lm/train.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "common/error.hpp"
#include "lm/score.hpp"
#include "numcore/ops.hpp"

namespace mtcn::lm {

using namespace numcore;

LabelSeq window_labels(const data::FeatureStore& store, const data::ContextWindow& window) {
  LabelSeq seq(window.size());
  for (std::size_t j = 0; j < window.size(); ++j) {
    if (window.padded(j)) continue;
    const auto& r = store.record(*window.slots[j]);
    seq[j] = {r.verb, r.noun};
  }
  return seq;
}

std::vector<LabelSeq> window_corpus(const data::FeatureStore& store, std::span<const std::size_t> rows, std::size_t w,
                                    data::WindowMode mode) {
  std::vector<LabelSeq> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(window_labels(store, data::make_window(store, r, w, mode)));
  return out;
}

std::vector<LabelSeq> video_sequences(const data::FeatureStore& store, std::span<const std::size_t> rows) {
  std::map<std::string, bool> wanted;
  for (auto r : rows) wanted[store.record(r).video_id] = true;
  std::vector<LabelSeq> out;
  for (const auto& [video, video_rows] : store.videos()) {
    if (!wanted.count(video)) continue;
    LabelSeq seq;
    for (auto r : video_rows) seq.push_back({store.record(r).verb, store.record(r).noun});
    out.push_back(std::move(seq));
  }
  return out;
}

ScheduledStep train_step_scheduled(LmModel& model, Optimizer& opt, std::span<const LabelSeq> truth,
                                   std::span<LabelSeq> working, Rng& rng, float replace_prob) {
  if (truth.empty()) throw InvalidArgument("lm: empty batch");
  if (truth.size() != working.size()) throw DimensionError("lm: working copies do not match the batch");
  const std::size_t w = model.config().window;
  ScheduledStep step;
  LmBatch batch;
  std::vector<std::size_t> readout;
  std::vector<ActionLabel> targets;
  for (std::size_t b = 0; b < truth.size(); ++b) {
    if (truth[b].size() < w || working[b].size() < w) {
      throw InvalidArgument("lm: sequence of length " + std::to_string(truth[b].size()) + " is shorter than window " +
                            std::to_string(w));
    }
    std::vector<std::size_t> real;
    for (std::size_t t = 0; t < w; ++t)
      if (!truth[b][t].pad()) real.push_back(t);
    if (real.empty()) throw InvalidArgument("lm: training window holds only padding");
    const std::size_t p = real[uniform_index(rng, real.size())];
    step.masked.push_back(p);
    readout.push_back(b * w + p);
    targets.push_back(truth[b][p]);
    model.append(batch, working[b], static_cast<std::ptrdiff_t>(p));
  }
  const LmOutput out = model.forward(batch, true, rng, readout);
  const Tensor loss = masked_loss(model, out, targets);
  backward(loss);
  opt.step();
  step.loss = loss.item();

  const std::size_t cv = out.verb_logits.cols();
  const std::size_t nn = model.config().num_nouns;
  for (std::size_t b = 0; b < truth.size(); ++b) {
    if (replace_prob < 1.0f && uniform01(rng) >= replace_prob) continue;
    const auto v = out.verb_logits.data().subspan(b * cv, cv);
    const std::size_t vi = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    ActionLabel pred;
    if (model.config().single_head) {
      pred = {static_cast<int>(vi / nn), static_cast<int>(vi % nn)};
    } else {
      const std::size_t cn = out.noun_logits.cols();
      const auto n = out.noun_logits.data().subspan(b * cn, cn);
      pred = {static_cast<int>(vi), static_cast<int>(std::max_element(n.begin(), n.end()) - n.begin())};
    }
    working[b][step.masked[b]] = pred;
  }
  return step;
}

float masked_accuracy(const LmModel& model, std::span<const LabelSeq> windows, std::size_t target) {
  if (windows.empty()) return 0.0f;
  std::size_t hit = 0, total = 0;
  const std::size_t chunk = 256;
  for (std::size_t s = 0; s < windows.size(); s += chunk) {
    const auto part = windows.subspan(s, std::min(chunk, windows.size() - s));
    const auto pred = predict_masked(model, part, target);
    for (std::size_t i = 0; i < part.size(); ++i) {
      if (part[i][target].pad()) continue;
      ++total;
      hit += pred[i] == part[i][target];
    }
  }
  return total ? static_cast<float>(hit) / static_cast<float>(total) : 0.0f;
}

LmTrainLog train_lm(LmModel& model, std::span<const LabelSeq> train, std::span<const LabelSeq> val,
                    const LmTrainConfig& cfg, std::uint64_t seed, const LmEpochCallback& on_epoch) {
  if (train.empty()) throw InvalidArgument("lm: no training sequences");
  if (cfg.batch_size == 0) throw InvalidArgument("lm: batch size must be positive");
  if (cfg.mask_rounds == 0) throw InvalidArgument("lm: mask_rounds must be positive");
  Rng rng(seed);
  Optimizer opt(model.params(), cfg.optimizer);
  const std::size_t target = data::target_slot(model.config().window, cfg.mode);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  LmTrainLog log;
  float best = -1.0f;
  std::size_t stale = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const float replace =
        cfg.replace_ramp ? static_cast<float>(epoch + 1) / static_cast<float>(cfg.epochs) : 1.0f;
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<LabelSeq> truth, working;
      for (std::size_t i = start; i < end; ++i) truth.push_back(train[order[i]]);
      working = truth;
      for (std::size_t r = 0; r < cfg.mask_rounds; ++r) {
        total += train_step_scheduled(model, opt, truth, working, rng, replace).loss;
        ++steps;
      }
    }
    log.epoch_loss.push_back(static_cast<float>(total / steps));
    log.lr.push_back(opt.lr());
    float acc = 0.0f;
    if (!val.empty()) {
      acc = masked_accuracy(model, val, target);
      log.val_accuracy.push_back(acc);
      if (acc > best) {
        best = acc;
        stale = 0;
      } else if (++stale >= cfg.plateau_patience) {
        opt.set_lr(opt.lr() * cfg.plateau_factor);
        stale = 0;
      }
    }
    if (on_epoch) on_epoch(epoch, log.epoch_loss.back(), acc);
  }
  return log;
}

}  // namespace mtcn::lm
