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
#include <span>
#include <string>
#include <vector>

#include "numcore/ops.hpp"
#include "numcore/params.hpp"
#include "numcore/rng.hpp"

namespace mtcn::numcore {

struct EncoderConfig {
  std::size_t dim = 512;
  std::size_t heads = 8;
  std::size_t layers = 4;
  std::size_t ffn_dim = 2048;
  float dropout = 0.1f;
  bool weight_sharing = true;
};

struct EncoderBlock {
  Tensor ln1_gain, ln1_bias;
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln2_gain, ln2_bias;
  Tensor w1, b1, w2, b2;
};

// Per-layer attention weights retained for inspection: batch x heads x T x T each.
struct AttentionTrace {
  std::vector<std::vector<float>> layers;
};

// Xavier-uniform weight, zero bias.
Tensor init_weight(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Stack of pre-norm self-attention + GELU feed-forward layers followed by a
// final LayerNorm. With weight sharing one block is applied `layers` times.
class TransformerEncoder {
 public:
  TransformerEncoder() = default;
  TransformerEncoder(const EncoderConfig& config, ParamSet& params, const std::string& prefix, Rng& rng);

  // x: (batch*seq_len) x dim rows.
  Tensor forward(const Tensor& x, const AttentionLayout& layout, std::span<const std::uint8_t> key_mask, bool train,
                 Rng& rng, AttentionTrace* trace = nullptr) const;

  const EncoderConfig& config() const { return config_; }
  std::size_t block_count() const { return blocks_.size(); }

 private:
  EncoderConfig config_;
  std::vector<EncoderBlock> blocks_;
  Tensor final_gain_, final_bias_;
};

}  // namespace mtcn::numcore
