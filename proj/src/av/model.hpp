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
#include <string>
#include <vector>

#include "numcore/params.hpp"
#include "numcore/transformer.hpp"

namespace mtcn::av {

using numcore::Tensor;

struct AvConfig {
  std::size_t window = 9;
  std::size_t visual_dim = 2304;
  std::size_t audio_dim = 2304;
  std::size_t model_dim = 512;
  std::size_t layers = 4;
  std::size_t heads = 8;
  std::size_t ffn_dim = 2048;
  float dropout_enc = 0.5f;
  float dropout_layer = 0.1f;
  bool weight_sharing = true;
  float beta = 0.9f;
  bool single_head = false;
  bool audio_enabled = true;
  std::size_t num_verbs = 97;
  std::size_t num_nouns = 300;
  // Action classes of the single head; 0 means num_verbs * num_nouns with
  // action id = verb * num_nouns + noun.
  std::size_t num_actions = 0;
  std::size_t clips_per_action = 10;
  float init_std = 0.001f;

  std::size_t modalities() const { return audio_enabled ? 2 : 1; }
  std::size_t cls_tokens() const { return single_head ? 1 : 2; }
  std::size_t action_classes() const { return num_actions ? num_actions : num_verbs * num_nouns; }
};

void validate(const AvConfig& cfg);

// Features for a batch of windows laid out by (window, slot, clip). Padding
// slots hold zeros and real[b * window + j] == 0.
struct AvInput {
  std::size_t batch = 0;
  std::size_t window = 0;
  std::size_t clips = 1;
  std::vector<float> visual;
  std::vector<float> audio;
  std::vector<std::uint8_t> real;
};

// Target mass per row; rows may be mixtures and need not sum to one. Padding
// rows of the per-slot targets are zero.
struct AvTargets {
  std::vector<float> centre_verb;  // batch x C_v
  std::vector<float> centre_noun;  // batch x C_n
  std::vector<float> slot_verb;    // batch*window x C_v
  std::vector<float> slot_noun;    // batch*window x C_n
  std::vector<float> centre_action;  // single-head mode only
  std::vector<float> slot_action;
};

enum class TokenKind { visual, audio, cls_verb, cls_noun, cls_action };
const char* to_string(TokenKind kind);

// Describes token t of one window's sequence.
struct TokenInfo {
  TokenKind kind;
  std::size_t slot;  // window position; w, w+1 for summary tokens
  std::size_t clip;
};

// X^e for a batch: (batch * tokens_per_window) x D rows plus the key mask.
struct EncodedSequence {
  Tensor tokens;
  std::vector<std::uint8_t> key_mask;
  std::vector<TokenInfo> layout;
  std::size_t batch = 0;
  std::size_t tokens_per_window = 0;
};

struct AvOutput {
  std::size_t batch = 0;
  std::size_t tokens_per_window = 0;
  std::vector<TokenInfo> layout;
  std::vector<std::uint8_t> key_mask;  // batch * tokens_per_window
  Tensor centre_verb, centre_noun, centre_action;  // batch x C
  // One row per modality token, ordered (window, token); empty unless requested.
  Tensor token_verb, token_noun, token_action;
  numcore::AttentionTrace attention;
  bool has_attention = false;
};

class AvModel {
 public:
  AvModel() = default;
  AvModel(const AvConfig& cfg, std::uint64_t seed);

  const AvConfig& config() const { return cfg_; }
  numcore::ParamSet& params() { return params_; }
  const numcore::ParamSet& params() const { return params_; }

  std::vector<TokenInfo> token_layout(std::size_t window, std::size_t clips) const;

  EncodedSequence encode(const AvInput& in, bool train, numcore::Rng& rng) const;
  AvOutput forward(const AvInput& in, bool train, numcore::Rng& rng, bool token_logits = true,
                   bool keep_attention = false) const;

  // beta * L_m + (1 - beta) * L_a, averaged over windows.
  Tensor loss(const AvOutput& out, const AvTargets& targets) const;

 private:
  Tensor project(const std::vector<float>& x, std::size_t rows, std::size_t in_dim, const Tensor& w, const Tensor& b,
                 bool train, numcore::Rng& rng) const;

  AvConfig cfg_;
  numcore::ParamSet params_;
  numcore::TransformerEncoder encoder_;
  Tensor gv_w_, gv_b_, ga_w_, ga_b_;
  Tensor pos_, mod_v_, mod_a_;
  Tensor cls_v_, cls_n_, cls_a_;
  Tensor head_v_w_, head_v_b_, head_n_w_, head_n_b_, head_a_w_, head_a_b_;
};

// Scalar count of trainable parameters for a config, without allocating it.
std::size_t parameter_count(const AvConfig& cfg);

}  // namespace mtcn::av
