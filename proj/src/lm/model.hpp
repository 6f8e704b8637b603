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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "numcore/params.hpp"
#include "numcore/rng.hpp"
#include "numcore/transformer.hpp"

namespace mtcn::lm {

using numcore::Tensor;

// One action of a label sequence. Padding outside the video is (-1, -1).
struct ActionLabel {
  int verb = -1;
  int noun = -1;

  bool pad() const { return verb < 0; }
  friend bool operator==(const ActionLabel&, const ActionLabel&) = default;
  friend auto operator<=>(const ActionLabel&, const ActionLabel&) = default;
};

using LabelSeq = std::vector<ActionLabel>;

struct LmConfig {
  std::size_t window = 9;
  std::size_t model_dim = 512;
  std::size_t layers = 4;
  std::size_t heads = 8;
  std::size_t ffn_dim = 2048;
  float dropout_enc = 0.1f;
  float dropout_layer = 0.1f;
  bool weight_sharing = true;
  // One action embedding of width model_dim instead of two halves; the action
  // id is verb * num_nouns + noun.
  bool single_head = false;
  std::size_t num_verbs = 97;
  std::size_t num_nouns = 300;
  float init_std = 0.001f;  // positional encodings
  float embed_std = 0.1f;
};

void validate(const LmConfig& cfg);

// Token ids per sub-vocabulary: classes first, then MASK = C and PAD = C + 1.
struct ActionVocab {
  std::size_t classes = 0;
  int mask() const { return static_cast<int>(classes); }
  int pad() const { return static_cast<int>(classes) + 1; }
  std::size_t size() const { return classes + 2; }
};

// Token ids for a batch of windows, row-major (window, position). In
// single-head mode only `verbs` is used and carries action ids.
struct LmBatch {
  std::size_t batch = 0;
  std::size_t window = 0;
  std::vector<int> verbs;
  std::vector<int> nouns;
};

struct LmOutput {
  // One row per read-out position; verb rows hold action logits in single-head mode.
  Tensor verb_logits, noun_logits;
  std::vector<std::size_t> rows;  // flat (b * window + t) index of each output row
};

class LmModel {
 public:
  LmModel() = default;
  LmModel(const LmConfig& cfg, std::uint64_t seed);

  const LmConfig& config() const { return cfg_; }
  numcore::ParamSet& params() { return params_; }
  const numcore::ParamSet& params() const { return params_; }

  const ActionVocab& verb_vocab() const { return verb_vocab_; }
  const ActionVocab& noun_vocab() const { return noun_vocab_; }
  std::size_t action_id(const ActionLabel& a) const;

  // Encodes labels as token ids; padding becomes PAD, and position `masked`
  // (if any) becomes MASK.
  void append(LmBatch& batch, const LabelSeq& seq, std::ptrdiff_t masked = -1) const;

  // Logits at `readout` flat positions, or at every position when empty. In
  // training mode each window must carry exactly one MASK.
  LmOutput forward(const LmBatch& in, bool train, numcore::Rng& rng, std::span<const std::size_t> readout = {}) const;

 private:
  LmConfig cfg_;
  ActionVocab verb_vocab_, noun_vocab_;
  numcore::ParamSet params_;
  numcore::TransformerEncoder encoder_;
  Tensor emb_v_, emb_n_, emb_a_, pos_;
  Tensor head_v_w_, head_v_b_, head_n_w_, head_n_b_;
};

// CE of verb + noun (or action) at one masked position per window, averaged
// over windows. `out` must read out exactly those positions.
Tensor masked_loss(const LmModel& model, const LmOutput& out, std::span<const ActionLabel> targets);

}  // namespace mtcn::lm
