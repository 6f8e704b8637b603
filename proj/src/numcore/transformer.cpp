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

#include "numcore/transformer.hpp"

#include <cmath>

#include "common/error.hpp"

namespace mtcn::numcore {

Tensor init_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
  std::uniform_real_distribution<float> dist(-bound, bound);
  std::vector<float> values(fan_in * fan_out);
  for (auto& v : values) v = dist(rng);
  return Tensor::from({fan_in, fan_out}, std::move(values));
}

TransformerEncoder::TransformerEncoder(const EncoderConfig& config, ParamSet& params, const std::string& prefix,
                                       Rng& rng)
    : config_(config) {
  if (config.heads == 0 || config.dim % config.heads != 0) {
    throw InvalidArgument("encoder: dim " + std::to_string(config.dim) + " not divisible by heads " +
                          std::to_string(config.heads));
  }
  if (config.layers == 0) throw InvalidArgument("encoder: needs at least one layer");
  const std::size_t d = config.dim, f = config.ffn_dim;
  const std::size_t distinct = config.weight_sharing ? 1 : config.layers;
  for (std::size_t l = 0; l < distinct; ++l) {
    const std::string p = prefix + (config.weight_sharing ? ".shared." : "." + std::to_string(l) + ".");
    EncoderBlock b;
    b.ln1_gain = params.add(p + "ln1.gain", Tensor::full({d}, 1.0f));
    b.ln1_bias = params.add(p + "ln1.bias", Tensor::zeros({d}));
    b.wq = params.add(p + "attn.wq", init_weight(d, d, rng));
    b.bq = params.add(p + "attn.bq", Tensor::zeros({d}));
    b.wk = params.add(p + "attn.wk", init_weight(d, d, rng));
    b.bk = params.add(p + "attn.bk", Tensor::zeros({d}));
    b.wv = params.add(p + "attn.wv", init_weight(d, d, rng));
    b.bv = params.add(p + "attn.bv", Tensor::zeros({d}));
    b.wo = params.add(p + "attn.wo", init_weight(d, d, rng));
    b.bo = params.add(p + "attn.bo", Tensor::zeros({d}));
    b.ln2_gain = params.add(p + "ln2.gain", Tensor::full({d}, 1.0f));
    b.ln2_bias = params.add(p + "ln2.bias", Tensor::zeros({d}));
    b.w1 = params.add(p + "ffn.w1", init_weight(d, f, rng));
    b.b1 = params.add(p + "ffn.b1", Tensor::zeros({f}));
    b.w2 = params.add(p + "ffn.w2", init_weight(f, d, rng));
    b.b2 = params.add(p + "ffn.b2", Tensor::zeros({d}));
    blocks_.push_back(std::move(b));
  }
  final_gain_ = params.add(prefix + ".final_ln.gain", Tensor::full({d}, 1.0f));
  final_bias_ = params.add(prefix + ".final_ln.bias", Tensor::zeros({d}));
}

Tensor TransformerEncoder::forward(const Tensor& x, const AttentionLayout& layout,
                                   std::span<const std::uint8_t> key_mask, bool train, Rng& rng,
                                   AttentionTrace* trace) const {
  if (x.rank() != 2 || x.dim(1) != config_.dim) {
    throw DimensionError("encoder: input " + shape_str(x.shape()) + " does not have width " +
                         std::to_string(config_.dim));
  }
  if (trace) trace->layers.clear();
  Tensor h = x;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const auto& b = blocks_[config_.weight_sharing ? 0 : l];
    const Tensor n1 = layer_norm(h, b.ln1_gain, b.ln1_bias);
    const Tensor q = linear(n1, b.wq, b.bq);
    const Tensor k = linear(n1, b.wk, b.bk);
    const Tensor v = linear(n1, b.wv, b.bv);
    std::vector<float>* probs = nullptr;
    if (trace) probs = &trace->layers.emplace_back();
    const Tensor a = linear(attention(q, k, v, layout, key_mask, probs), b.wo, b.bo);
    h = add(h, dropout(a, config_.dropout, rng, train));
    const Tensor n2 = layer_norm(h, b.ln2_gain, b.ln2_bias);
    const Tensor ff = linear(gelu(linear(n2, b.w1, b.b1)), b.w2, b.b2);
    h = add(h, dropout(ff, config_.dropout, rng, train));
  }
  return layer_norm(h, final_gain_, final_bias_);
}

}  // namespace mtcn::numcore
