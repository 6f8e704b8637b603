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

#include "numcore/rng.hpp"
#include "numcore/tensor.hpp"

namespace mtcn::numcore {

// Many ops treat a tensor as a row matrix: rows() x cols() over the trailing axis.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float factor);
// x: rows x n, bias: n values broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& bias);
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

Tensor gelu(const Tensor& x);
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor log_softmax(const Tensor& x, std::size_t axis);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, float eps = 1e-5f);

// Inverted dropout: identity when !train or p == 0.
Tensor dropout(const Tensor& x, float p, Rng& rng, bool train);

// out[r] = x[indices[r]]; gradients scatter-add back.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);

// Mean over the batch of -sum_c t[b,c] * log_softmax(logits)[b,c].
Tensor cross_entropy(const Tensor& logits, std::span<const int> classes);
Tensor cross_entropy(const Tensor& logits, const Tensor& soft_targets);
// Sum over rows of -sum_c t[b,c] * log_softmax(logits)[b,c]. Target rows may
// carry any non-negative mass (zero rows contribute nothing); targets are
// constants, not graph inputs.
Tensor cross_entropy_sum(const Tensor& logits, std::span<const float> targets);

struct AttentionLayout {
  std::size_t batch = 1;
  std::size_t seq_len = 1;
  std::size_t heads = 1;
};

// Scaled dot-product attention over packed rows. q, k, v: (batch*seq_len) x D,
// head h owns columns [h*D/H, (h+1)*D/H). key_mask has batch*seq_len entries;
// zero marks a padded key that receives exactly zero weight. When probs is
// non-null it receives batch x heads x seq_len x seq_len weights.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionLayout& layout,
                 std::span<const std::uint8_t> key_mask, std::vector<float>* probs = nullptr);

// Diagnostics helper used at model boundaries.
void check_finite(const Tensor& t, const char* what);

}  // namespace mtcn::numcore
