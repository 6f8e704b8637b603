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

#include "numcore/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "common/error.hpp"

namespace mtcn::numcore {

namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::span<float> detail::Node::grad_buffer() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0f);
  return grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0f, requires_grad); }

Tensor Tensor::full(Shape shape, float value, bool requires_grad) {
  auto node = std::make_shared<detail::Node>();
  node->data.assign(shape_numel(shape), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<float> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_str(shape) + " needs " + std::to_string(shape_numel(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(float value, bool requires_grad) { return from({}, {value}, requires_grad); }

const Shape& Tensor::shape() const {
  if (!node_) throw StateError("undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::size_t Tensor::cols() const {
  const auto& s = shape();
  return s.empty() ? 1 : s.back();
}

std::size_t Tensor::rows() const {
  const auto c = cols();
  return c == 0 ? 0 : numel() / c;
}

std::span<const float> Tensor::data() const {
  shape();
  return node_->data;
}

std::span<float> Tensor::mutable_data() {
  shape();
  return node_->data;
}

float Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  shape();
  node_->requires_grad = on;
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->data.size() && !node_->data.empty(); }

std::span<const float> Tensor::grad() const {
  shape();
  return node_->grad_buffer();
}

std::span<float> Tensor::mutable_grad() {
  shape();
  return node_->grad_buffer();
}

void Tensor::zero_grad() {
  if (node_) std::fill(node_->grad.begin(), node_->grad.end(), 0.0f);
}

Tensor Tensor::detach() const { return from(shape(), node_->data, false); }

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void backward(const Tensor& loss) {
  if (!loss.defined()) throw StateError("backward on undefined tensor");
  if (loss.numel() != 1) {
    throw DimensionError("backward needs a scalar loss, got shape " + shape_str(loss.shape()));
  }
  detail::Node* root = loss.node();
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order without recursion depth limits.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{root, 0}};
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto* node : order) {
    if (node->backward_fn) {
      auto g = node->grad_buffer();
      std::fill(g.begin(), g.end(), 0.0f);
    }
  }
  root->grad_buffer()[0] += 1.0f;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace mtcn::numcore
