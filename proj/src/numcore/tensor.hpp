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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mtcn::numcore {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<float> data;
  // Empty until the first backward pass touches this node.
  std::vector<float> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backward_fn;

  std::span<float> grad_buffer();
};

}  // namespace detail

// Reference-counted handle to a dense row-major float tensor. Copies share
// storage; ops produce fresh tensors and record the graph when grad mode is on.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, float value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<float> values, bool requires_grad = false);
  static Tensor scalar(float value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;
  // Trailing-axis length; a rank-1 tensor is a single row.
  std::size_t cols() const;
  std::size_t rows() const;

  std::span<const float> data() const;
  // Direct mutation is reserved for parameter initialization and optimizers.
  std::span<float> mutable_data();
  float item() const;

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  // Zero-filled view when no gradient has been accumulated yet.
  std::span<const float> grad() const;
  std::span<float> mutable_grad();
  void zero_grad();

  // Drops graph history; the result shares no storage with this tensor.
  Tensor detach() const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// Thread-local switch; evaluation paths run with recording disabled.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Reverse-mode sweep from a scalar. Leaf gradients accumulate across calls;
// interior gradients are recomputed on every call.
void backward(const Tensor& loss);

}  // namespace mtcn::numcore
