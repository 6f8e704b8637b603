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

// Straight-line double-precision implementations used as test oracles.
// Matrices are row-major std::vector<double>.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace mtcn::testing::ref {

using Vec = std::vector<double>;

inline Vec matmul(const Vec& a, const Vec& b, std::size_t m, std::size_t k, std::size_t n) {
  Vec out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      out[i * n + j] = s;
    }
  return out;
}

inline Vec linear(const Vec& x, const Vec& w, const Vec& b, std::size_t rows, std::size_t in, std::size_t out) {
  Vec y = matmul(x, w, rows, in, out);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < out; ++j) y[r * out + j] += b[j];
  return y;
}

inline Vec add(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

// Softmax along `axis` of a tensor with dims (outer, axis_len, inner).
inline Vec softmax(const Vec& x, std::size_t outer, std::size_t axis_len, std::size_t inner) {
  Vec out(x.size());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < inner; ++in) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < axis_len; ++a) mx = std::max(mx, x[(o * axis_len + a) * inner + in]);
      double z = 0.0;
      for (std::size_t a = 0; a < axis_len; ++a) z += std::exp(x[(o * axis_len + a) * inner + in] - mx);
      for (std::size_t a = 0; a < axis_len; ++a) {
        const std::size_t i = (o * axis_len + a) * inner + in;
        out[i] = std::exp(x[i] - mx) / z;
      }
    }
  return out;
}

inline Vec log_softmax_rows(const Vec& x, std::size_t rows, std::size_t cols) {
  Vec out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, x[r * cols + c]);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(x[r * cols + c] - mx);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = x[r * cols + c] - mx - std::log(z);
  }
  return out;
}

inline Vec layer_norm(const Vec& x, const Vec& g, const Vec& b, std::size_t rows, std::size_t n, double eps = 1e-5) {
  Vec out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += x[r * n + i];
    mu /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x[r * n + i] - mu) * (x[r * n + i] - mu);
    var /= n;
    for (std::size_t i = 0; i < n; ++i) out[r * n + i] = (x[r * n + i] - mu) / std::sqrt(var + eps) * g[i] + b[i];
  }
  return out;
}

inline Vec gelu(Vec x) {
  for (auto& v : x) v = 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
  return x;
}

// Multi-head scaled dot-product attention for one packed batch.
inline Vec attention(const Vec& q, const Vec& k, const Vec& v, std::size_t batch, std::size_t T, std::size_t heads,
                     std::size_t D, const std::vector<std::uint8_t>& mask, std::vector<double>* probs = nullptr) {
  const std::size_t dh = D / heads;
  Vec out(batch * T * D, 0.0);
  if (probs) probs->assign(batch * heads * T * T, 0.0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < T; ++i) {
        std::vector<double> s(T, -std::numeric_limits<double>::infinity());
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < T; ++j) {
          if (!mask[b * T + j]) continue;
          double dot = 0.0;
          for (std::size_t d = 0; d < dh; ++d) dot += q[(b * T + i) * D + h * dh + d] * k[(b * T + j) * D + h * dh + d];
          s[j] = dot / std::sqrt(static_cast<double>(dh));
          mx = std::max(mx, s[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < T; ++j)
          if (mask[b * T + j]) z += std::exp(s[j] - mx);
        for (std::size_t j = 0; j < T; ++j) {
          if (!mask[b * T + j]) continue;
          const double p = std::exp(s[j] - mx) / z;
          if (probs) (*probs)[((b * heads + h) * T + i) * T + j] = p;
          for (std::size_t d = 0; d < dh; ++d) out[(b * T + i) * D + h * dh + d] += p * v[(b * T + j) * D + h * dh + d];
        }
      }
  return out;
}

// Sum over rows of -sum_c t * log softmax(logits).
inline double cross_entropy_sum(const Vec& logits, const Vec& targets, std::size_t rows, std::size_t cols) {
  const Vec lp = log_softmax_rows(logits, rows, cols);
  double loss = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) loss -= targets[i] * lp[i];
  return loss;
}

}  // namespace mtcn::testing::ref
