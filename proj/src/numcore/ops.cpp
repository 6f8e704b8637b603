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

#include "numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "common/error.hpp"

namespace mtcn::numcore {

namespace {

using detail::Node;

// Builds the output node and, when recording, wires parents and the backward closure.
Tensor make_result(Shape shape, std::vector<float> data, std::vector<Tensor> parents,
                   std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  bool record = grad_enabled() && std::any_of(parents.begin(), parents.end(),
                                              [](const Tensor& p) { return p.requires_grad(); });
  if (record) {
    node->requires_grad = true;
    for (auto& p : parents) node->parents.push_back(p.node_ptr());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

// Grad buffer of parent i if it participates in differentiation, else empty.
std::span<float> parent_grad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return {};
  return p.grad_buffer();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

struct AxisSplit {
  std::size_t outer, axis, inner;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " invalid for shape " +
                         shape_str(shape));
  }
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

constexpr float kInvSqrt2 = 0.70710678118654752440f;
constexpr float kInvSqrt2Pi = 0.39894228040143267794f;

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<float> out(m * n, 0.0f);
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    float* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const float aip = A[i * k + p];
      if (aip == 0.0f) continue;
      const float* brow = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& G = self.grad;
    const auto& A = self.parents[0]->data;
    const auto& B = self.parents[1]->data;
    if (auto ga = parent_grad(self, 0); !ga.empty()) {
      // dA = G * B^T
      for (std::size_t i = 0; i < m; ++i) {
        const float* grow = G.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const float* brow = B.data() + p * n;
          float acc = 0.0f;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (auto gb = parent_grad(self, 1); !gb.empty()) {
      // dB = A^T * G
      for (std::size_t i = 0; i < m; ++i) {
        const float* grow = G.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const float aip = A[i * k + p];
          if (aip == 0.0f) continue;
          float* gbrow = gb.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<float> out(a.data().begin(), a.data().end());
  auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (auto g = parent_grad(self, p); !g.empty()) {
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<float> out(a.data().begin(), a.data().end());
  auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (auto g = parent_grad(self, 0); !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (auto g = parent_grad(self, 1); !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<float> out(a.numel());
  auto A = a.data();
  auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] * B[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    const auto& A = self.parents[0]->data;
    const auto& B = self.parents[1]->data;
    if (auto g = parent_grad(self, 0); !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * B[i];
    }
    if (auto g = parent_grad(self, 1); !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * A[i];
    }
  });
}

Tensor scale(const Tensor& a, float factor) {
  std::vector<float> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= factor;
  return make_result(a.shape(), std::move(out), {a}, [factor](Node& self) {
    auto g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  const std::size_t n = x.cols();
  if (bias.numel() != n) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not match rows of " +
                         shape_str(x.shape()));
  }
  std::vector<float> out(x.data().begin(), x.data().end());
  auto B = bias.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i % n];
  return make_result(x.shape(), std::move(out), {x, bias}, [n](Node& self) {
    if (auto g = parent_grad(self, 0); !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (auto g = parent_grad(self, 1); !g.empty()) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i % n] += self.grad[i];
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add_bias(matmul(x, weight), bias);
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (float v : a.data()) acc += v;
  return make_result({}, {static_cast<float>(acc)}, {a}, [](Node& self) {
    auto g = parent_grad(self, 0);
    const float gv = self.grad[0];
    for (auto& v : g) v += gv;
  });
}

Tensor mean(const Tensor& a) {
  const std::size_t n = a.numel();
  if (n == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(a), 1.0f / static_cast<float>(n));
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: " + shape_str(a.shape()) + " to " + shape_str(shape));
  }
  std::vector<float> out(a.data().begin(), a.data().end());
  return make_result(std::move(shape), std::move(out), {a}, [](Node& self) {
    auto g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor gelu(const Tensor& x) {
  std::vector<float> out(x.numel());
  auto X = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5f * X[i] * (1.0f + std::erf(X[i] * kInvSqrt2));
  return make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    auto g = parent_grad(self, 0);
    const auto& X = self.parents[0]->data;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const float cdf = 0.5f * (1.0f + std::erf(X[i] * kInvSqrt2));
      const float pdf = kInvSqrt2Pi * std::exp(-0.5f * X[i] * X[i]);
      g[i] += self.grad[i] * (cdf + X[i] * pdf);
    }
  });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const auto s = split_axis(x.shape(), axis, "softmax");
  std::vector<float> out(x.numel());
  auto X = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.axis * s.inner + in;
      float mx = -std::numeric_limits<float>::infinity();
      for (std::size_t a = 0; a < s.axis; ++a) mx = std::max(mx, X[base + a * s.inner]);
      double z = 0.0;
      for (std::size_t a = 0; a < s.axis; ++a) {
        const float e = std::exp(X[base + a * s.inner] - mx);
        out[base + a * s.inner] = e;
        z += e;
      }
      const float inv = static_cast<float>(1.0 / z);
      for (std::size_t a = 0; a < s.axis; ++a) out[base + a * s.inner] *= inv;
    }
  }
  return make_result(x.shape(), std::move(out), {x}, [s](Node& self) {
    auto g = parent_grad(self, 0);
    const auto& Y = self.data;
    const auto& G = self.grad;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = o * s.axis * s.inner + in;
        double dot = 0.0;
        for (std::size_t a = 0; a < s.axis; ++a) dot += G[base + a * s.inner] * Y[base + a * s.inner];
        for (std::size_t a = 0; a < s.axis; ++a) {
          const std::size_t i = base + a * s.inner;
          g[i] += Y[i] * (G[i] - static_cast<float>(dot));
        }
      }
    }
  });
}

Tensor log_softmax(const Tensor& x, std::size_t axis) {
  const auto s = split_axis(x.shape(), axis, "log_softmax");
  std::vector<float> out(x.numel());
  auto X = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.axis * s.inner + in;
      float mx = -std::numeric_limits<float>::infinity();
      for (std::size_t a = 0; a < s.axis; ++a) mx = std::max(mx, X[base + a * s.inner]);
      double z = 0.0;
      for (std::size_t a = 0; a < s.axis; ++a) z += std::exp(static_cast<double>(X[base + a * s.inner] - mx));
      const float lse = mx + static_cast<float>(std::log(z));
      for (std::size_t a = 0; a < s.axis; ++a) out[base + a * s.inner] = X[base + a * s.inner] - lse;
    }
  }
  return make_result(x.shape(), std::move(out), {x}, [s](Node& self) {
    auto g = parent_grad(self, 0);
    const auto& Y = self.data;
    const auto& G = self.grad;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = o * s.axis * s.inner + in;
        double gsum = 0.0;
        for (std::size_t a = 0; a < s.axis; ++a) gsum += G[base + a * s.inner];
        for (std::size_t a = 0; a < s.axis; ++a) {
          const std::size_t i = base + a * s.inner;
          g[i] += G[i] - std::exp(Y[i]) * static_cast<float>(gsum);
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, float eps) {
  const std::size_t n = x.cols();
  if (gain.numel() != n || bias.numel() != n) {
    throw DimensionError("layer_norm: gain " + shape_str(gain.shape()) + " / bias " + shape_str(bias.shape()) +
                         " do not match last axis of " + shape_str(x.shape()));
  }
  const std::size_t rows = x.rows();
  auto X = x.data();
  auto Gm = gain.data();
  auto Bt = bias.data();
  std::vector<float> out(x.numel());
  // Per-row normalized values and inverse std are kept for the backward pass.
  auto xhat = std::make_shared<std::vector<float>>(x.numel());
  auto inv_std = std::make_shared<std::vector<float>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const float* xr = X.data() + r * n;
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += xr[i];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (xr[i] - mu) * (xr[i] - mu);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = static_cast<float>(is);
    for (std::size_t i = 0; i < n; ++i) {
      const float h = static_cast<float>((xr[i] - mu) * is);
      (*xhat)[r * n + i] = h;
      out[r * n + i] = h * Gm[i] + Bt[i];
    }
  }
  return make_result(x.shape(), std::move(out), {x, gain, bias}, [n, rows, xhat, inv_std](Node& self) {
    const auto& G = self.grad;
    const auto& Gm = self.parents[1]->data;
    auto gx = parent_grad(self, 0);
    auto gg = parent_grad(self, 1);
    auto gb = parent_grad(self, 2);
    for (std::size_t r = 0; r < rows; ++r) {
      const float* grow = G.data() + r * n;
      const float* hrow = xhat->data() + r * n;
      if (!gg.empty()) {
        for (std::size_t i = 0; i < n; ++i) gg[i] += grow[i] * hrow[i];
      }
      if (!gb.empty()) {
        for (std::size_t i = 0; i < n; ++i) gb[i] += grow[i];
      }
      if (!gx.empty()) {
        double sum_dh = 0.0, sum_dh_h = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dh = static_cast<double>(grow[i]) * Gm[i];
          sum_dh += dh;
          sum_dh_h += dh * hrow[i];
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        const double is = (*inv_std)[r];
        for (std::size_t i = 0; i < n; ++i) {
          const double dh = static_cast<double>(grow[i]) * Gm[i];
          gx[r * n + i] += static_cast<float>(is * (dh - sum_dh * inv_n - hrow[i] * sum_dh_h * inv_n));
        }
      }
    }
  });
}

Tensor dropout(const Tensor& x, float p, Rng& rng, bool train) {
  if (p < 0.0f || p >= 1.0f) throw InvalidArgument("dropout: probability must lie in [0, 1), got " + std::to_string(p));
  if (!train || p == 0.0f) return x;
  const float keep_scale = 1.0f / (1.0f - p);
  auto mask = std::make_shared<std::vector<float>>(x.numel());
  std::bernoulli_distribution keep(1.0 - p);
  for (auto& m : *mask) m = keep(rng) ? keep_scale : 0.0f;
  std::vector<float> out(x.numel());
  auto X = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = X[i] * (*mask)[i];
  return make_result(x.shape(), std::move(out), {x}, [mask](Node& self) {
    auto g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (*mask)[i];
  });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  const std::size_t n = x.cols();
  const std::size_t rows = x.rows();
  std::vector<float> out(indices.size() * n);
  auto X = x.data();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows) {
      throw DimensionError("gather_rows: index " + std::to_string(indices[r]) + " out of range for " +
                           shape_str(x.shape()));
    }
    std::copy_n(X.data() + indices[r] * n, n, out.data() + r * n);
  }
  auto idx = std::make_shared<std::vector<std::size_t>>(indices.begin(), indices.end());
  return make_result({indices.size(), n}, std::move(out), {x}, [n, idx](Node& self) {
    auto g = parent_grad(self, 0);
    for (std::size_t r = 0; r < idx->size(); ++r) {
      float* dst = g.data() + (*idx)[r] * n;
      const float* src = self.grad.data() + r * n;
      for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
    }
  });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no inputs");
  const std::size_t n = parts.front().cols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.cols() != n) {
      throw DimensionError("concat_rows: column mismatch " + shape_str(parts.front().shape()) + " vs " +
                           shape_str(p.shape()));
    }
    total += p.rows();
  }
  std::vector<float> out;
  out.reserve(total * n);
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    offsets.push_back(out.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return make_result({total, n}, std::move(out), std::move(parents), [offsets](Node& self) {
    for (std::size_t p = 0; p < self.parents.size(); ++p) {
      auto g = parent_grad(self, p);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offsets[p] + i];
    }
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols: no inputs");
  const std::size_t rows = parts.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + shape_str(parts.front().shape()) + " vs " +
                           shape_str(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<float> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto D = parts[p].data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(D.data() + r * widths[p], widths[p], out.data() + r * total + offset);
    }
    offset += widths[p];
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return make_result({rows, total}, std::move(out), std::move(parents), [rows, total, widths](Node& self) {
    std::size_t offset = 0;
    for (std::size_t p = 0; p < self.parents.size(); ++p) {
      auto g = parent_grad(self, p);
      if (!g.empty()) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t i = 0; i < widths[p]; ++i) g[r * widths[p] + i] += self.grad[r * total + offset + i];
        }
      }
      offset += widths[p];
    }
  });
}

Tensor cross_entropy_sum(const Tensor& logits, std::span<const float> targets) {
  if (logits.rank() != 2) throw DimensionError("cross_entropy: logits must be 2-D, got " + shape_str(logits.shape()));
  const std::size_t rows = logits.dim(0), classes = logits.dim(1);
  if (targets.size() != rows * classes) {
    throw DimensionError("cross_entropy: targets hold " + std::to_string(targets.size()) + " values for logits " +
                         shape_str(logits.shape()));
  }
  auto L = logits.data();
  auto probs = std::make_shared<std::vector<float>>(rows * classes);
  auto tgt = std::make_shared<std::vector<float>>(targets.begin(), targets.end());
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const float* lr = L.data() + r * classes;
    float mx = -std::numeric_limits<float>::infinity();
    for (std::size_t c = 0; c < classes; ++c) mx = std::max(mx, lr[c]);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(static_cast<double>(lr[c] - mx));
    const double lse = mx + std::log(z);
    for (std::size_t c = 0; c < classes; ++c) {
      const double logp = lr[c] - lse;
      (*probs)[r * classes + c] = static_cast<float>(std::exp(logp));
      const float t = targets[r * classes + c];
      if (t != 0.0f) loss -= t * logp;
    }
  }
  return make_result({}, {static_cast<float>(loss)}, {logits}, [rows, classes, probs, tgt](Node& self) {
    auto g = parent_grad(self, 0);
    const float gv = self.grad[0];
    for (std::size_t r = 0; r < rows; ++r) {
      float mass = 0.0f;
      for (std::size_t c = 0; c < classes; ++c) mass += (*tgt)[r * classes + c];
      if (mass == 0.0f) continue;
      for (std::size_t c = 0; c < classes; ++c) {
        const std::size_t i = r * classes + c;
        g[i] += gv * (mass * (*probs)[i] - (*tgt)[i]);
      }
    }
  });
}

Tensor cross_entropy(const Tensor& logits, const Tensor& soft_targets) {
  require_same_shape(logits, soft_targets, "cross_entropy");
  if (logits.rank() != 2 || logits.dim(0) == 0) {
    throw DimensionError("cross_entropy: logits must be non-empty B x C, got " + shape_str(logits.shape()));
  }
  return scale(cross_entropy_sum(logits, soft_targets.data()), 1.0f / static_cast<float>(logits.dim(0)));
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> classes) {
  if (logits.rank() != 2 || logits.dim(0) == 0) {
    throw DimensionError("cross_entropy: logits must be non-empty B x C, got " + shape_str(logits.shape()));
  }
  const std::size_t rows = logits.dim(0), c = logits.dim(1);
  if (classes.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(classes.size()) + " targets for " +
                         std::to_string(rows) + " rows");
  }
  std::vector<float> onehot(rows * c, 0.0f);
  for (std::size_t r = 0; r < rows; ++r) {
    if (classes[r] < 0 || static_cast<std::size_t>(classes[r]) >= c) {
      throw InvalidArgument("cross_entropy: class index " + std::to_string(classes[r]) + " outside [0, " +
                            std::to_string(c) + ")");
    }
    onehot[r * c + static_cast<std::size_t>(classes[r])] = 1.0f;
  }
  return scale(cross_entropy_sum(logits, onehot), 1.0f / static_cast<float>(rows));
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionLayout& layout,
                 std::span<const std::uint8_t> key_mask, std::vector<float>* probs_out) {
  require_same_shape(q, k, "attention");
  require_same_shape(q, v, "attention");
  const std::size_t B = layout.batch, T = layout.seq_len, H = layout.heads;
  if (q.rank() != 2 || q.dim(0) != B * T) {
    throw DimensionError("attention: expected " + std::to_string(B * T) + " rows, got " + shape_str(q.shape()));
  }
  const std::size_t D = q.dim(1);
  if (H == 0 || D % H != 0) {
    throw DimensionError("attention: width " + std::to_string(D) + " not divisible by " + std::to_string(H) +
                         " heads");
  }
  if (key_mask.size() != B * T) {
    throw DimensionError("attention: key mask has " + std::to_string(key_mask.size()) + " entries, expected " +
                         std::to_string(B * T));
  }
  const std::size_t dh = D / H;
  const float inv_scale = 1.0f / std::sqrt(static_cast<float>(dh));
  auto Q = q.data();
  auto K = k.data();
  auto V = v.data();
  auto P = std::make_shared<std::vector<float>>(B * H * T * T, 0.0f);
  auto mask = std::make_shared<std::vector<std::uint8_t>>(key_mask.begin(), key_mask.end());
  std::vector<float> out(B * T * D, 0.0f);
  std::vector<float> scores(T);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < T; ++i) {
        const float* qi = Q.data() + (b * T + i) * D + h * dh;
        float mx = -std::numeric_limits<float>::infinity();
        for (std::size_t j = 0; j < T; ++j) {
          if (!key_mask[b * T + j]) continue;
          const float* kj = K.data() + (b * T + j) * D + h * dh;
          float s = 0.0f;
          for (std::size_t d = 0; d < dh; ++d) s += qi[d] * kj[d];
          scores[j] = s * inv_scale;
          mx = std::max(mx, scores[j]);
        }
        float* prow = P->data() + ((b * H + h) * T + i) * T;
        if (mx == -std::numeric_limits<float>::infinity()) continue;  // every key padded
        double z = 0.0;
        for (std::size_t j = 0; j < T; ++j) {
          if (!key_mask[b * T + j]) continue;
          prow[j] = std::exp(scores[j] - mx);
          z += prow[j];
        }
        const float inv = static_cast<float>(1.0 / z);
        float* orow = out.data() + (b * T + i) * D + h * dh;
        for (std::size_t j = 0; j < T; ++j) {
          if (!key_mask[b * T + j]) continue;
          prow[j] *= inv;
          const float* vj = V.data() + (b * T + j) * D + h * dh;
          for (std::size_t d = 0; d < dh; ++d) orow[d] += prow[j] * vj[d];
        }
      }
    }
  }
  if (probs_out) *probs_out = *P;
  return make_result({B * T, D}, std::move(out), {q, k, v}, [B, T, H, D, dh, inv_scale, P, mask](Node& self) {
    const auto& Q = self.parents[0]->data;
    const auto& K = self.parents[1]->data;
    const auto& V = self.parents[2]->data;
    const auto& G = self.grad;
    auto gq = parent_grad(self, 0);
    auto gk = parent_grad(self, 1);
    auto gv = parent_grad(self, 2);
    std::vector<float> dp(T);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t i = 0; i < T; ++i) {
          const float* prow = P->data() + ((b * H + h) * T + i) * T;
          const float* gi = G.data() + (b * T + i) * D + h * dh;
          double dot = 0.0;
          for (std::size_t j = 0; j < T; ++j) {
            if (!(*mask)[b * T + j]) {
              dp[j] = 0.0f;
              continue;
            }
            const float* vj = V.data() + (b * T + j) * D + h * dh;
            float s = 0.0f;
            for (std::size_t d = 0; d < dh; ++d) s += gi[d] * vj[d];
            dp[j] = s;
            dot += static_cast<double>(s) * prow[j];
            if (!gv.empty()) {
              float* gvj = gv.data() + (b * T + j) * D + h * dh;
              for (std::size_t d = 0; d < dh; ++d) gvj[d] += prow[j] * gi[d];
            }
          }
          const float* qi = Q.data() + (b * T + i) * D + h * dh;
          float* gqi = gq.empty() ? nullptr : gq.data() + (b * T + i) * D + h * dh;
          for (std::size_t j = 0; j < T; ++j) {
            if (!(*mask)[b * T + j] || prow[j] == 0.0f) continue;
            const float ds = prow[j] * (dp[j] - static_cast<float>(dot)) * inv_scale;
            const float* kj = K.data() + (b * T + j) * D + h * dh;
            if (gqi) {
              for (std::size_t d = 0; d < dh; ++d) gqi[d] += ds * kj[d];
            }
            if (!gk.empty()) {
              float* gkj = gk.data() + (b * T + j) * D + h * dh;
              for (std::size_t d = 0; d < dh; ++d) gkj[d] += ds * qi[d];
            }
          }
        }
      }
    }
  });
}

void check_finite(const Tensor& t, const char* what) {
  for (float v : t.data()) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
  }
}

}  // namespace mtcn::numcore
