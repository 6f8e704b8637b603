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

#include "av/batch.hpp"

#include <algorithm>
#include <numeric>

#include "common/error.hpp"

namespace mtcn::av {

namespace {

void check_dims(const data::FeatureStore& store, const AvConfig& cfg) {
  if (store.visual().dim != cfg.visual_dim) {
    throw DimensionError("av: visual feature dim " + std::to_string(store.visual().dim) + " does not match config " +
                         std::to_string(cfg.visual_dim));
  }
  if (cfg.audio_enabled) {
    if (!store.has_audio()) throw DimensionError("av: audio enabled but the store has no audio features");
    if (store.audio().dim != cfg.audio_dim) {
      throw DimensionError("av: audio feature dim " + std::to_string(store.audio().dim) +
                           " does not match config " + std::to_string(cfg.audio_dim));
    }
  }
}

void mix_rows(std::vector<float>& v, std::size_t row_len, std::size_t rows_per_window,
              std::span<const std::size_t> partner, std::span<const float> lambda) {
  if (v.empty()) return;
  const std::vector<float> src = v;
  const std::size_t block = row_len * rows_per_window;
  for (std::size_t b = 0; b < partner.size(); ++b) {
    const float lam = lambda[b];
    const float* x = src.data() + b * block;
    const float* y = src.data() + partner[b] * block;
    float* o = v.data() + b * block;
    for (std::size_t i = 0; i < block; ++i) o[i] = lam * x[i] + (1.0f - lam) * y[i];
  }
}

}  // namespace

AvInput build_input(const data::FeatureStore& store, std::span<const data::ContextWindow> windows,
                    const AvConfig& cfg, ClipPolicy policy, numcore::Rng* rng) {
  if (windows.empty()) throw InvalidArgument("av: empty batch");
  check_dims(store, cfg);
  const std::size_t w = cfg.window;
  const std::size_t store_clips = store.clips_per_action();
  if (policy == ClipPolicy::all && store_clips != cfg.clips_per_action) {
    throw DimensionError("av: store has " + std::to_string(store_clips) + " clips per action, config expects " +
                         std::to_string(cfg.clips_per_action));
  }
  if (policy == ClipPolicy::sampled && !rng) throw InvalidArgument("av: clip sampling needs an rng");
  AvInput in;
  in.batch = windows.size();
  in.window = w;
  in.clips = policy == ClipPolicy::all ? store_clips : 1;
  const std::size_t C = in.clips;
  in.visual.assign(in.batch * w * C * cfg.visual_dim, 0.0f);
  if (cfg.audio_enabled) in.audio.assign(in.batch * w * C * cfg.audio_dim, 0.0f);
  in.real.assign(in.batch * w, 0);
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const auto& win = windows[b];
    if (win.size() != w) {
      throw DimensionError("av: window of length " + std::to_string(win.size()) + " in a batch configured for " +
                           std::to_string(w));
    }
    for (std::size_t j = 0; j < w; ++j) {
      if (!win.slots[j]) continue;
      const std::size_t row = *win.slots[j];
      in.real[b * w + j] = 1;
      const std::size_t sampled = policy == ClipPolicy::sampled ? numcore::uniform_index(*rng, store_clips) : 0;
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t clip = policy == ClipPolicy::all ? c : sampled;
        const std::size_t slot = (b * w + j) * C + c;
        auto v = store.visual().clip(row, clip);
        std::copy(v.begin(), v.end(), in.visual.begin() + slot * cfg.visual_dim);
        if (cfg.audio_enabled) {
          auto a = store.audio().clip(row, clip);
          std::copy(a.begin(), a.end(), in.audio.begin() + slot * cfg.audio_dim);
        }
      }
    }
  }
  return in;
}

AvTargets build_targets(const data::FeatureStore& store, std::span<const data::ContextWindow> windows,
                        const AvConfig& cfg) {
  const std::size_t B = windows.size(), w = cfg.window;
  AvTargets t;
  auto check = [](int label, std::size_t classes, const char* what) {
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw InvalidArgument(std::string("av: ") + what + " label " + std::to_string(label) +
                            " outside vocabulary of " + std::to_string(classes));
    }
  };
  if (cfg.single_head) {
    const std::size_t A = cfg.action_classes();
    t.centre_action.assign(B * A, 0.0f);
    t.slot_action.assign(B * w * A, 0.0f);
  } else {
    t.centre_verb.assign(B * cfg.num_verbs, 0.0f);
    t.centre_noun.assign(B * cfg.num_nouns, 0.0f);
    t.slot_verb.assign(B * w * cfg.num_verbs, 0.0f);
    t.slot_noun.assign(B * w * cfg.num_nouns, 0.0f);
  }
  for (std::size_t b = 0; b < B; ++b) {
    const auto& win = windows[b];
    for (std::size_t j = 0; j < w; ++j) {
      if (!win.slots[j]) continue;
      const auto& rec = store.record(*win.slots[j]);
      if (cfg.single_head) {
        check(rec.verb, cfg.num_verbs, "verb");
        check(rec.noun, cfg.num_nouns, "noun");
        const std::size_t a = static_cast<std::size_t>(rec.verb) * cfg.num_nouns + rec.noun;
        check(static_cast<int>(a), cfg.action_classes(), "action");
        t.slot_action[(b * w + j) * cfg.action_classes() + a] = 1.0f;
        if (j == win.target) t.centre_action[b * cfg.action_classes() + a] = 1.0f;
      } else {
        check(rec.verb, cfg.num_verbs, "verb");
        check(rec.noun, cfg.num_nouns, "noun");
        t.slot_verb[(b * w + j) * cfg.num_verbs + rec.verb] = 1.0f;
        t.slot_noun[(b * w + j) * cfg.num_nouns + rec.noun] = 1.0f;
        if (j == win.target) {
          t.centre_verb[b * cfg.num_verbs + rec.verb] = 1.0f;
          t.centre_noun[b * cfg.num_nouns + rec.noun] = 1.0f;
        }
      }
    }
  }
  return t;
}

void mix_pairs(AvInput& in, AvTargets& t, std::span<const std::size_t> partner, std::span<const float> lambda) {
  const std::size_t B = in.batch, w = in.window;
  if (partner.size() != B || lambda.size() != B) throw DimensionError("mixup: partner/lambda size mismatch");
  const std::size_t feat_rows = w * in.clips;
  const std::size_t dv = in.visual.size() / (B * feat_rows);
  mix_rows(in.visual, dv, feat_rows, partner, lambda);
  if (!in.audio.empty()) mix_rows(in.audio, in.audio.size() / (B * feat_rows), feat_rows, partner, lambda);
  auto mix_targets = [&](std::vector<float>& v, std::size_t rows_per_window) {
    if (v.empty()) return;
    mix_rows(v, v.size() / (B * rows_per_window), rows_per_window, partner, lambda);
  };
  mix_targets(t.centre_verb, 1);
  mix_targets(t.centre_noun, 1);
  mix_targets(t.centre_action, 1);
  mix_targets(t.slot_verb, w);
  mix_targets(t.slot_noun, w);
  mix_targets(t.slot_action, w);
  const auto real = in.real;
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t j = 0; j < w; ++j) {
      const bool own = lambda[b] > 0.0f && real[b * w + j];
      const bool other = lambda[b] < 1.0f && real[partner[b] * w + j];
      in.real[b * w + j] = own || other;
    }
}

void mixup(AvInput& in, AvTargets& t, float alpha, numcore::Rng& rng) {
  if (alpha <= 0.0f) return;
  std::vector<std::size_t> partner(in.batch);
  std::iota(partner.begin(), partner.end(), 0);
  std::shuffle(partner.begin(), partner.end(), rng);
  std::vector<float> lambda(in.batch);
  for (auto& l : lambda) l = static_cast<float>(numcore::beta_sample(rng, alpha, alpha));
  mix_pairs(in, t, partner, lambda);
}

}  // namespace mtcn::av
