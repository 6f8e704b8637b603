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

#include "av/model.hpp"

#include <random>

#include "common/error.hpp"
#include "numcore/ops.hpp"

namespace mtcn::av {

using namespace numcore;

namespace {

Tensor normal_init(Shape shape, float stddev, Rng& rng) {
  std::normal_distribution<float> dist(0.0f, stddev);
  std::vector<float> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

std::size_t block_params(std::size_t d, std::size_t f) { return 4 * (d * d + d) + 4 * d + d * f + f + f * d + d; }

}  // namespace

const char* to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::visual: return "visual";
    case TokenKind::audio: return "audio";
    case TokenKind::cls_verb: return "cls_verb";
    case TokenKind::cls_noun: return "cls_noun";
    case TokenKind::cls_action: return "cls_action";
  }
  return "?";
}

void validate(const AvConfig& c) {
  if (c.window == 0 || c.window % 2 == 0) {
    // Online mode uses the same odd lengths; the target index moves, not the shape.
    throw InvalidArgument("av: window length must be odd and positive, got " + std::to_string(c.window));
  }
  if (c.model_dim == 0 || c.heads == 0 || c.model_dim % c.heads != 0) {
    throw InvalidArgument("av: model_dim " + std::to_string(c.model_dim) + " must be divisible by heads " +
                          std::to_string(c.heads));
  }
  if (c.layers == 0) throw InvalidArgument("av: layers must be positive");
  if (!(c.beta >= 0.0f && c.beta <= 1.0f)) throw InvalidArgument("av: beta must lie in [0, 1]");
  if (!(c.dropout_enc >= 0.0f && c.dropout_enc < 1.0f) || !(c.dropout_layer >= 0.0f && c.dropout_layer < 1.0f)) {
    throw InvalidArgument("av: dropout must lie in [0, 1)");
  }
  if (c.visual_dim == 0 || (c.audio_enabled && c.audio_dim == 0)) throw InvalidArgument("av: zero feature dim");
  if (c.single_head ? c.action_classes() == 0 : (c.num_verbs == 0 || c.num_nouns == 0)) {
    throw InvalidArgument("av: class counts must be positive");
  }
}

std::size_t parameter_count(const AvConfig& c) {
  validate(c);
  const std::size_t d = c.model_dim;
  std::size_t n = c.visual_dim * d + d;
  if (c.audio_enabled) n += c.audio_dim * d + d + 2 * d;
  n += (c.window + c.cls_tokens()) * d + c.cls_tokens() * d;
  n += (c.weight_sharing ? 1 : c.layers) * block_params(d, c.ffn_dim) + 2 * d;
  if (c.single_head) {
    n += d * c.action_classes() + c.action_classes();
  } else {
    n += d * c.num_verbs + c.num_verbs + d * c.num_nouns + c.num_nouns;
  }
  return n;
}

AvModel::AvModel(const AvConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate(cfg_);
  Rng rng(seed);
  const std::size_t d = cfg_.model_dim;
  gv_w_ = params_.add("g_v.weight", init_weight(cfg_.visual_dim, d, rng));
  gv_b_ = params_.add("g_v.bias", Tensor::zeros({d}));
  if (cfg_.audio_enabled) {
    ga_w_ = params_.add("g_a.weight", init_weight(cfg_.audio_dim, d, rng));
    ga_b_ = params_.add("g_a.bias", Tensor::zeros({d}));
  }
  pos_ = params_.add("pos", normal_init({cfg_.window + cfg_.cls_tokens(), d}, cfg_.init_std, rng));
  if (cfg_.audio_enabled) {
    mod_v_ = params_.add("mod_v", normal_init({1, d}, cfg_.init_std, rng));
    mod_a_ = params_.add("mod_a", normal_init({1, d}, cfg_.init_std, rng));
  }
  if (cfg_.single_head) {
    cls_a_ = params_.add("cls_a", normal_init({1, d}, cfg_.init_std, rng));
  } else {
    cls_v_ = params_.add("cls_v", normal_init({1, d}, cfg_.init_std, rng));
    cls_n_ = params_.add("cls_n", normal_init({1, d}, cfg_.init_std, rng));
  }
  EncoderConfig ec{d, cfg_.heads, cfg_.layers, cfg_.ffn_dim, cfg_.dropout_layer, cfg_.weight_sharing};
  encoder_ = TransformerEncoder(ec, params_, "encoder", rng);
  if (cfg_.single_head) {
    head_a_w_ = params_.add("head_a.weight", init_weight(d, cfg_.action_classes(), rng));
    head_a_b_ = params_.add("head_a.bias", Tensor::zeros({cfg_.action_classes()}));
  } else {
    head_v_w_ = params_.add("head_v.weight", init_weight(d, cfg_.num_verbs, rng));
    head_v_b_ = params_.add("head_v.bias", Tensor::zeros({cfg_.num_verbs}));
    head_n_w_ = params_.add("head_n.weight", init_weight(d, cfg_.num_nouns, rng));
    head_n_b_ = params_.add("head_n.bias", Tensor::zeros({cfg_.num_nouns}));
  }
}

std::vector<TokenInfo> AvModel::token_layout(std::size_t window, std::size_t clips) const {
  std::vector<TokenInfo> out;
  for (std::size_t m = 0; m < cfg_.modalities(); ++m)
    for (std::size_t j = 0; j < window; ++j)
      for (std::size_t c = 0; c < clips; ++c) out.push_back({m == 0 ? TokenKind::visual : TokenKind::audio, j, c});
  if (cfg_.single_head) {
    out.push_back({TokenKind::cls_action, window, 0});
  } else {
    out.push_back({TokenKind::cls_verb, window, 0});
    out.push_back({TokenKind::cls_noun, window + 1, 0});
  }
  return out;
}

Tensor AvModel::project(const std::vector<float>& x, std::size_t rows, std::size_t in_dim, const Tensor& w,
                        const Tensor& b, bool train, Rng& rng) const {
  if (x.size() != rows * in_dim) {
    throw DimensionError("av: feature block holds " + std::to_string(x.size()) + " values, expected " +
                         std::to_string(rows) + " x " + std::to_string(in_dim));
  }
  const Tensor input = Tensor::from({rows, in_dim}, x);
  return linear(dropout(input, cfg_.dropout_enc, rng, train), w, b);
}

EncodedSequence AvModel::encode(const AvInput& in, bool train, Rng& rng) const {
  if (in.batch == 0) throw InvalidArgument("av: empty batch");
  if (in.window != cfg_.window) {
    throw DimensionError("av: input window " + std::to_string(in.window) + " does not match configured " +
                         std::to_string(cfg_.window));
  }
  if (in.clips == 0) throw InvalidArgument("av: clips per action must be positive");
  if (in.real.size() != in.batch * in.window) throw DimensionError("av: padding flags do not match batch shape");

  const std::size_t B = in.batch, w = in.window, C = in.clips, M = cfg_.modalities();
  const std::size_t slots = B * w * C;
  EncodedSequence seq;
  seq.layout = token_layout(w, C);
  seq.batch = B;
  const std::size_t T = seq.tokens_per_window = seq.layout.size();

  std::vector<Tensor> content{project(in.visual, slots, cfg_.visual_dim, gv_w_, gv_b_, train, rng)};
  if (cfg_.audio_enabled) content.push_back(project(in.audio, slots, cfg_.audio_dim, ga_w_, ga_b_, train, rng));
  const std::size_t cls_base = M * slots;
  if (cfg_.single_head) {
    content.push_back(cls_a_);
  } else {
    content.push_back(cls_v_);
    content.push_back(cls_n_);
  }
  const Tensor content_table = concat_rows(content);

  std::vector<std::size_t> content_idx(B * T), pos_idx(B * T), mod_idx(B * T);
  seq.key_mask.assign(B * T, 1);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      const auto& info = seq.layout[t];
      const std::size_t r = b * T + t;
      pos_idx[r] = info.slot;
      switch (info.kind) {
        case TokenKind::visual:
        case TokenKind::audio: {
          const std::size_t m = info.kind == TokenKind::visual ? 0 : 1;
          content_idx[r] = m * slots + (b * w + info.slot) * C + info.clip;
          mod_idx[r] = m;
          seq.key_mask[r] = in.real[b * w + info.slot];
          break;
        }
        case TokenKind::cls_verb:
        case TokenKind::cls_action: content_idx[r] = cls_base; mod_idx[r] = 2; break;
        case TokenKind::cls_noun: content_idx[r] = cls_base + 1; mod_idx[r] = 2; break;
      }
    }
  }

  Tensor x = add(gather_rows(content_table, content_idx), gather_rows(pos_, pos_idx));
  if (cfg_.audio_enabled) {
    const std::vector<Tensor> mods{mod_v_, mod_a_, Tensor::zeros({1, cfg_.model_dim})};
    x = add(x, gather_rows(concat_rows(mods), mod_idx));
  }
  seq.tokens = dropout(x, cfg_.dropout_enc, rng, train);
  return seq;
}

AvOutput AvModel::forward(const AvInput& in, bool train, Rng& rng, bool token_logits, bool keep_attention) const {
  EncodedSequence seq = encode(in, train, rng);
  const std::size_t B = seq.batch, T = seq.tokens_per_window;
  const std::size_t modal_tokens = T - cfg_.cls_tokens();
  AvOutput out;
  out.batch = B;
  out.tokens_per_window = T;
  out.key_mask = std::move(seq.key_mask);
  const Tensor x = seq.tokens;

  const AttentionLayout attn{B, T, cfg_.heads};
  const Tensor z = encoder_.forward(x, attn, out.key_mask, train, rng, keep_attention ? &out.attention : nullptr);
  out.has_attention = keep_attention;
  check_finite(z, "av encoder output");

  auto rows_of = [&](std::size_t offset) {
    std::vector<std::size_t> idx(B);
    for (std::size_t b = 0; b < B; ++b) idx[b] = b * T + modal_tokens + offset;
    return gather_rows(z, idx);
  };
  if (cfg_.single_head) {
    out.centre_action = linear(rows_of(0), head_a_w_, head_a_b_);
  } else {
    out.centre_verb = linear(rows_of(0), head_v_w_, head_v_b_);
    out.centre_noun = linear(rows_of(1), head_n_w_, head_n_b_);
  }
  if (token_logits) {
    std::vector<std::size_t> idx;
    idx.reserve(B * modal_tokens);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < modal_tokens; ++t) idx.push_back(b * T + t);
    const Tensor tokens = gather_rows(z, idx);
    if (cfg_.single_head) {
      out.token_action = linear(tokens, head_a_w_, head_a_b_);
    } else {
      out.token_verb = linear(tokens, head_v_w_, head_v_b_);
      out.token_noun = linear(tokens, head_n_w_, head_n_b_);
    }
  }
  out.layout = std::move(seq.layout);
  return out;
}

Tensor AvModel::loss(const AvOutput& out, const AvTargets& t) const {
  const std::size_t B = out.batch;
  const std::size_t w = cfg_.window;
  const std::size_t modal_tokens = out.tokens_per_window - cfg_.cls_tokens();
  const float beta = cfg_.beta;

  // Per-token targets: each modality token copies its slot's row.
  auto token_targets = [&](const std::vector<float>& slot_rows, std::size_t classes) {
    if (slot_rows.size() != B * w * classes) {
      throw DimensionError("av: slot targets hold " + std::to_string(slot_rows.size()) + " values, expected " +
                           std::to_string(B * w * classes));
    }
    std::vector<float> rows(B * modal_tokens * classes);
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t t = 0; t < modal_tokens; ++t) {
        const std::size_t j = out.layout[t].slot;
        std::copy_n(slot_rows.data() + (b * w + j) * classes, classes, rows.data() + (b * modal_tokens + t) * classes);
      }
    return rows;
  };

  Tensor lm, la;
  if (cfg_.single_head) {
    lm = cross_entropy_sum(out.centre_action, t.centre_action);
  } else {
    lm = add(cross_entropy_sum(out.centre_verb, t.centre_verb), cross_entropy_sum(out.centre_noun, t.centre_noun));
  }
  Tensor total = scale(lm, beta);
  if (beta < 1.0f) {
    if (cfg_.single_head) {
      if (!out.token_action.defined()) throw StateError("av: auxiliary loss needs token logits");
      la = cross_entropy_sum(out.token_action, token_targets(t.slot_action, cfg_.action_classes()));
    } else {
      if (!out.token_verb.defined()) throw StateError("av: auxiliary loss needs token logits");
      la = add(cross_entropy_sum(out.token_verb, token_targets(t.slot_verb, cfg_.num_verbs)),
               cross_entropy_sum(out.token_noun, token_targets(t.slot_noun, cfg_.num_nouns)));
    }
    total = add(total, scale(la, 1.0f - beta));
  }
  return scale(total, 1.0f / static_cast<float>(B));
}

}  // namespace mtcn::av
