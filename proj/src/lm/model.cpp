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

#include "lm/model.hpp"

#include <random>

#include "common/error.hpp"
#include "numcore/ops.hpp"

namespace mtcn::lm {

using namespace numcore;

namespace {

Tensor normal_init(Shape shape, float stddev, Rng& rng) {
  std::normal_distribution<float> dist(0.0f, stddev);
  std::vector<float> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::from(std::move(shape), std::move(v));
}

}  // namespace

void validate(const LmConfig& c) {
  if (c.window == 0 || c.window % 2 == 0) {
    throw InvalidArgument("lm: window length must be odd and positive, got " + std::to_string(c.window));
  }
  if (c.model_dim == 0 || c.heads == 0 || c.model_dim % c.heads != 0) {
    throw InvalidArgument("lm: model_dim " + std::to_string(c.model_dim) + " must be divisible by heads " +
                          std::to_string(c.heads));
  }
  if (!c.single_head && c.model_dim % 2 != 0) throw InvalidArgument("lm: model_dim must be even (two half embeddings)");
  if (c.layers == 0) throw InvalidArgument("lm: layers must be positive");
  if (c.num_verbs == 0 || c.num_nouns == 0) throw InvalidArgument("lm: class counts must be positive");
  if (!(c.dropout_enc >= 0.0f && c.dropout_enc < 1.0f) || !(c.dropout_layer >= 0.0f && c.dropout_layer < 1.0f)) {
    throw InvalidArgument("lm: dropout must lie in [0, 1)");
  }
}

LmModel::LmModel(const LmConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate(cfg_);
  Rng rng(seed);
  const std::size_t d = cfg_.model_dim;
  if (cfg_.single_head) {
    verb_vocab_.classes = cfg_.num_verbs * cfg_.num_nouns;
    emb_a_ = params_.add("emb_a", normal_init({verb_vocab_.size(), d}, cfg_.embed_std, rng));
  } else {
    verb_vocab_.classes = cfg_.num_verbs;
    noun_vocab_.classes = cfg_.num_nouns;
    emb_v_ = params_.add("emb_v", normal_init({verb_vocab_.size(), d / 2}, cfg_.embed_std, rng));
    emb_n_ = params_.add("emb_n", normal_init({noun_vocab_.size(), d / 2}, cfg_.embed_std, rng));
  }
  pos_ = params_.add("pos", normal_init({cfg_.window, d}, cfg_.init_std, rng));
  EncoderConfig ec{d, cfg_.heads, cfg_.layers, cfg_.ffn_dim, cfg_.dropout_layer, cfg_.weight_sharing};
  encoder_ = TransformerEncoder(ec, params_, "encoder", rng);
  if (cfg_.single_head) {
    head_v_w_ = params_.add("head_a.weight", init_weight(d, verb_vocab_.classes, rng));
    head_v_b_ = params_.add("head_a.bias", Tensor::zeros({verb_vocab_.classes}));
  } else {
    head_v_w_ = params_.add("head_v.weight", init_weight(d, cfg_.num_verbs, rng));
    head_v_b_ = params_.add("head_v.bias", Tensor::zeros({cfg_.num_verbs}));
    head_n_w_ = params_.add("head_n.weight", init_weight(d, cfg_.num_nouns, rng));
    head_n_b_ = params_.add("head_n.bias", Tensor::zeros({cfg_.num_nouns}));
  }
}

std::size_t LmModel::action_id(const ActionLabel& a) const {
  return static_cast<std::size_t>(a.verb) * cfg_.num_nouns + static_cast<std::size_t>(a.noun);
}

void LmModel::append(LmBatch& batch, const LabelSeq& seq, std::ptrdiff_t masked) const {
  if (seq.size() != cfg_.window) {
    throw DimensionError("lm: sequence of length " + std::to_string(seq.size()) + " does not match window " +
                         std::to_string(cfg_.window));
  }
  if (batch.window == 0) batch.window = cfg_.window;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto& a = seq[t];
    if (!a.pad() && (a.verb >= static_cast<int>(cfg_.num_verbs) || a.noun < 0 ||
                     a.noun >= static_cast<int>(cfg_.num_nouns))) {
      throw InvalidArgument("lm: action (" + std::to_string(a.verb) + ", " + std::to_string(a.noun) +
                            ") outside the vocabulary");
    }
    const bool m = static_cast<std::ptrdiff_t>(t) == masked;
    if (cfg_.single_head) {
      batch.verbs.push_back(m ? verb_vocab_.mask() : a.pad() ? verb_vocab_.pad() : static_cast<int>(action_id(a)));
    } else {
      batch.verbs.push_back(m ? verb_vocab_.mask() : a.pad() ? verb_vocab_.pad() : a.verb);
      batch.nouns.push_back(m ? noun_vocab_.mask() : a.pad() ? noun_vocab_.pad() : a.noun);
    }
  }
  ++batch.batch;
}

LmOutput LmModel::forward(const LmBatch& in, bool train, Rng& rng, std::span<const std::size_t> readout) const {
  if (in.batch == 0) throw InvalidArgument("lm: empty batch");
  if (in.window != cfg_.window) {
    throw DimensionError("lm: input window " + std::to_string(in.window) + " does not match configured " +
                         std::to_string(cfg_.window));
  }
  const std::size_t B = in.batch, w = in.window, n = B * w;
  if (in.verbs.size() != n || (!cfg_.single_head && in.nouns.size() != n)) {
    throw DimensionError("lm: token arrays do not match batch x window");
  }
  std::vector<std::size_t> vid(n), nid(cfg_.single_head ? 0 : n), pos(n);
  std::vector<std::uint8_t> key_mask(n, 1);
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t masks = 0;
    for (std::size_t t = 0; t < w; ++t) {
      const std::size_t r = b * w + t;
      const int v = in.verbs[r];
      if (v < 0 || static_cast<std::size_t>(v) >= verb_vocab_.size()) throw InvalidArgument("lm: token id out of range");
      vid[r] = static_cast<std::size_t>(v);
      pos[r] = t;
      if (v == verb_vocab_.pad()) key_mask[r] = 0;
      if (v == verb_vocab_.mask()) ++masks;
      if (!cfg_.single_head) {
        const int u = in.nouns[r];
        if (u < 0 || static_cast<std::size_t>(u) >= noun_vocab_.size()) throw InvalidArgument("lm: token id out of range");
        if ((u == noun_vocab_.pad()) != (v == verb_vocab_.pad()) || (u == noun_vocab_.mask()) != (v == verb_vocab_.mask())) {
          throw InvalidArgument("lm: MASK/PAD must cover both sub-tokens of an action");
        }
        nid[r] = static_cast<std::size_t>(u);
      }
    }
    if (train && masks != 1) {
      throw InvalidArgument("lm: training window " + std::to_string(b) + " carries " + std::to_string(masks) +
                            " masks, expected exactly one");
    }
  }

  Tensor x;
  if (cfg_.single_head) {
    x = gather_rows(emb_a_, vid);
  } else {
    const std::vector<Tensor> halves{gather_rows(emb_v_, vid), gather_rows(emb_n_, nid)};
    x = concat_cols(halves);
  }
  x = dropout(add(x, gather_rows(pos_, pos)), cfg_.dropout_enc, rng, train);
  const Tensor z = encoder_.forward(x, AttentionLayout{B, w, cfg_.heads}, key_mask, train, rng);
  check_finite(z, "lm encoder output");

  LmOutput out;
  if (readout.empty()) {
    out.rows.resize(n);
    for (std::size_t r = 0; r < n; ++r) out.rows[r] = r;
  } else {
    out.rows.assign(readout.begin(), readout.end());
    for (auto r : out.rows)
      if (r >= n) throw InvalidArgument("lm: read-out position out of range");
  }
  const Tensor h = gather_rows(z, out.rows);
  out.verb_logits = linear(h, head_v_w_, head_v_b_);
  if (!cfg_.single_head) out.noun_logits = linear(h, head_n_w_, head_n_b_);
  return out;
}

Tensor masked_loss(const LmModel& model, const LmOutput& out, std::span<const ActionLabel> targets) {
  if (targets.size() != out.rows.size()) throw DimensionError("lm: one target per read-out row expected");
  std::vector<int> v(targets.size()), n(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].pad()) throw InvalidArgument("lm: padding cannot be a prediction target");
    v[i] = model.config().single_head ? static_cast<int>(model.action_id(targets[i])) : targets[i].verb;
    n[i] = targets[i].noun;
  }
  if (model.config().single_head) return cross_entropy(out.verb_logits, v);
  return add(cross_entropy(out.verb_logits, v), cross_entropy(out.noun_logits, n));
}

}  // namespace mtcn::lm
