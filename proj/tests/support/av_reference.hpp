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

// Straight-line double-precision forward pass and loss of the audio-visual
// model, written against parameter names and the token ordering only.

#include <map>
#include <string>
#include <vector>

#include "av/model.hpp"
#include "support/reference.hpp"

namespace mtcn::testing::ref {

using ParamMap = std::map<std::string, Vec>;

inline ParamMap param_map(const numcore::ParamSet& params) {
  ParamMap out;
  for (const auto& e : params.entries()) out[e.name] = Vec(e.tensor.data().begin(), e.tensor.data().end());
  return out;
}

struct AvRefOutput {
  Vec centre_verb, centre_noun, centre_action;
  Vec token_verb, token_noun, token_action;
  std::vector<Vec> attention;  // per layer, batch x heads x T x T
  double loss = 0.0;
};

inline Vec row(const Vec& m, std::size_t r, std::size_t n) { return Vec(m.begin() + r * n, m.begin() + (r + 1) * n); }

inline AvRefOutput av_forward(const av::AvConfig& cfg, const ParamMap& p, const av::AvInput& in,
                              const av::AvTargets* targets) {
  const std::size_t B = in.batch, w = in.window, C = in.clips, D = cfg.model_dim, F = cfg.ffn_dim;
  const std::size_t M = cfg.audio_enabled ? 2 : 1;
  const std::size_t ncls = cfg.single_head ? 1 : 2;
  const std::size_t modal = M * w * C;
  const std::size_t T = modal + ncls;

  const Vec xv(in.visual.begin(), in.visual.end());
  const Vec pv = linear(xv, p.at("g_v.weight"), p.at("g_v.bias"), B * w * C, cfg.visual_dim, D);
  Vec pa;
  if (cfg.audio_enabled) {
    const Vec xa(in.audio.begin(), in.audio.end());
    pa = linear(xa, p.at("g_a.weight"), p.at("g_a.bias"), B * w * C, cfg.audio_dim, D);
  }
  const Vec& pos = p.at("pos");

  Vec h(B * T * D, 0.0);
  std::vector<std::uint8_t> mask(B * T, 1);
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t t = 0;
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t j = 0; j < w; ++j)
        for (std::size_t c = 0; c < C; ++c, ++t) {
          const Vec& proj = m == 0 ? pv : pa;
          const std::size_t src = (b * w + j) * C + c;
          for (std::size_t d = 0; d < D; ++d) {
            double v = proj[src * D + d] + pos[j * D + d];
            if (cfg.audio_enabled) v += p.at(m == 0 ? "mod_v" : "mod_a")[d];
            h[(b * T + t) * D + d] = v;
          }
          mask[b * T + t] = in.real[b * w + j];
        }
    const std::vector<std::string> cls = cfg.single_head ? std::vector<std::string>{"cls_a"}
                                                         : std::vector<std::string>{"cls_v", "cls_n"};
    for (std::size_t k = 0; k < ncls; ++k, ++t)
      for (std::size_t d = 0; d < D; ++d) h[(b * T + t) * D + d] = p.at(cls[k])[d] + pos[(w + k) * D + d];
  }

  AvRefOutput out;
  const std::size_t R = B * T;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string pre = cfg.weight_sharing ? "encoder.shared." : "encoder." + std::to_string(l) + ".";
    auto P = [&](const std::string& n) -> const Vec& { return p.at(pre + n); };
    const Vec n1 = layer_norm(h, P("ln1.gain"), P("ln1.bias"), R, D);
    const Vec q = linear(n1, P("attn.wq"), P("attn.bq"), R, D, D);
    const Vec k = linear(n1, P("attn.wk"), P("attn.bk"), R, D, D);
    const Vec v = linear(n1, P("attn.wv"), P("attn.bv"), R, D, D);
    std::vector<double> probs;
    const Vec a = attention(q, k, v, B, T, cfg.heads, D, mask, &probs);
    out.attention.push_back(probs);
    h = add(h, linear(a, P("attn.wo"), P("attn.bo"), R, D, D));
    const Vec n2 = layer_norm(h, P("ln2.gain"), P("ln2.bias"), R, D);
    const Vec f1 = gelu(linear(n2, P("ffn.w1"), P("ffn.b1"), R, D, F));
    h = add(h, linear(f1, P("ffn.w2"), P("ffn.b2"), R, F, D));
  }
  const Vec z = layer_norm(h, p.at("encoder.final_ln.gain"), p.at("encoder.final_ln.bias"), R, D);

  auto head = [&](const std::string& name, std::size_t classes, const std::vector<std::size_t>& rows) {
    Vec x;
    for (auto r : rows) {
      const Vec zr = row(z, r, D);
      x.insert(x.end(), zr.begin(), zr.end());
    }
    return linear(x, p.at(name + ".weight"), p.at(name + ".bias"), rows.size(), D, classes);
  };
  std::vector<std::size_t> cls0, cls1, tok;
  for (std::size_t b = 0; b < B; ++b) {
    cls0.push_back(b * T + modal);
    cls1.push_back(b * T + modal + 1);
    for (std::size_t t = 0; t < modal; ++t) tok.push_back(b * T + t);
  }
  const std::size_t A = cfg.action_classes();
  if (cfg.single_head) {
    out.centre_action = head("head_a", A, cls0);
    out.token_action = head("head_a", A, tok);
  } else {
    out.centre_verb = head("head_v", cfg.num_verbs, cls0);
    out.centre_noun = head("head_n", cfg.num_nouns, cls1);
    out.token_verb = head("head_v", cfg.num_verbs, tok);
    out.token_noun = head("head_n", cfg.num_nouns, tok);
  }
  if (!targets) return out;

  // Token (m, j, c) of window b is supervised with slot j's target row.
  auto expand = [&](const std::vector<float>& slot, std::size_t classes) {
    Vec tt;
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t j = 0; j < w; ++j)
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t k = 0; k < classes; ++k) tt.push_back(slot[(b * w + j) * classes + k]);
    return tt;
  };
  auto dv = [](const std::vector<float>& f) { return Vec(f.begin(), f.end()); };
  double lm = 0.0, la = 0.0;
  if (cfg.single_head) {
    lm = cross_entropy_sum(out.centre_action, dv(targets->centre_action), B, A);
    la = cross_entropy_sum(out.token_action, expand(targets->slot_action, A), B * modal, A);
  } else {
    lm = cross_entropy_sum(out.centre_verb, dv(targets->centre_verb), B, cfg.num_verbs) +
         cross_entropy_sum(out.centre_noun, dv(targets->centre_noun), B, cfg.num_nouns);
    la = cross_entropy_sum(out.token_verb, expand(targets->slot_verb, cfg.num_verbs), B * modal, cfg.num_verbs) +
         cross_entropy_sum(out.token_noun, expand(targets->slot_noun, cfg.num_nouns), B * modal, cfg.num_nouns);
  }
  out.loss = (cfg.beta * lm + (1.0 - cfg.beta) * la) / B;
  return out;
}

}  // namespace mtcn::testing::ref
