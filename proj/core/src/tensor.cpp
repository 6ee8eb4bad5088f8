// Copyright 2026 The STEC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stec/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace stec {

namespace {

#ifdef NDEBUG
std::atomic<bool> g_finite_checks{false};
#else
std::atomic<bool> g_finite_checks{true};
#endif

template <typename T>
void check_finite(const char* op, const std::vector<T>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "non-finite value " << values[i] << " at flat index " << i
          << " produced by '" << op << "'";
      throw NonFiniteError(msg.str());
    }
  }
}

}  // namespace

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled); }
bool finite_checks_enabled() { return g_finite_checks.load(); }

template <typename T>
std::span<T> grad_sink(Node<T>& node) {
  if (!node.requires_grad) return {};
  if (node.grad.size() != node.value.size()) {
    node.grad.assign(node.value.size(), T(0));
  }
  return node.grad;
}

template std::span<float> grad_sink(Node<float>&);
template std::span<double> grad_sink(Node<double>&);

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  std::vector<T> data(numel(shape), value);
  return from_data(std::move(shape), std::move(data), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from_data(Shape shape, std::vector<T> data,
                               bool requires_grad) {
  for (std::size_t extent : shape) {
    if (extent == 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           to_string(shape));
    }
  }
  if (numel(shape) != data.size()) {
    throw DimensionError("shape " + to_string(shape) + " needs " +
                         std::to_string(numel(shape)) + " values, got " +
                         std::to_string(data.size()));
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->value.size(), T(0));
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from_op(const char* op, Shape shape, std::vector<T> value,
                             std::vector<Tensor> parents,
                             BackwardFn<T> backward) {
  if (numel(shape) != value.size()) {
    throw DimensionError(std::string(op) + ": result shape " +
                         to_string(shape) + " does not match " +
                         std::to_string(value.size()) + " values");
  }
  if (finite_checks_enabled()) check_finite(op, value);
  auto node = std::make_shared<Node<T>>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  for (auto& parent : parents) {
    if (parent.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (auto& parent : parents) node->parents.push_back(parent.node_);
    node->backward_fn = std::move(backward);
  }
  return Tensor(std::move(node));
}

template <typename T>
const Shape& Tensor<T>::shape() const {
  if (!node_) throw Error("use of an undefined tensor");
  return node_->shape;
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + to_string(s));
  }
  return s[axis];
}

template <typename T>
std::size_t Tensor<T>::size() const {
  return numel(shape());
}

template <typename T>
std::span<const T> Tensor<T>::data() const {
  shape();
  return node_->value;
}

template <typename T>
std::span<T> Tensor<T>::mutable_data() {
  shape();
  return node_->value;
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) {
    throw DimensionError("item() on tensor of shape " + to_string(shape()));
  }
  return node_->value[0];
}

template <typename T>
T Tensor<T>::at(std::initializer_list<std::size_t> index) const {
  const Shape& s = shape();
  if (index.size() != s.size()) {
    throw DimensionError("index rank does not match shape " + to_string(s));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= s[axis]) throw DimensionError("index out of range");
    flat = flat * s[axis] + i;
    ++axis;
  }
  return node_->value[flat];
}

template <typename T>
bool Tensor<T>::requires_grad() const {
  return node_ && node_->requires_grad;
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  if (!requires_grad()) return {};
  return grad_sink(*node_);
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
  if (!requires_grad()) return {};
  return grad_sink(*node_);
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (!requires_grad()) return;
  node_->grad.assign(node_->value.size(), T(0));
}

template <typename T>
std::vector<Node<T>*> topological_order(const Tensor<T>& root) {
  std::vector<Node<T>*> order;
  if (!root.requires_grad()) return order;
  std::unordered_set<Node<T>*> visited;
  // Iterative post-order DFS; (node, next parent index) frames.
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }
  return order;
}

template std::vector<Node<float>*> topological_order(const Tensor<float>&);
template std::vector<Node<double>*> topological_order(const Tensor<double>&);

template <typename T>
void Tensor<T>::backward() const {
  if (size() != 1) {
    throw DimensionError("backward() needs a scalar loss, got shape " +
                         to_string(shape()));
  }
  if (!requires_grad()) return;
  const auto order = topological_order(*this);
  // Each sweep starts from zero everywhere; the gradients a leaf already
  // held are added back afterwards, so repeated sweeps accumulate whole
  // sweep results (two sweeps give exactly twice one sweep).
  std::vector<std::pair<Node<T>*, std::vector<T>>> held;
  for (Node<T>* node : order) {
    if (node->is_leaf() && node->grad.size() == node->value.size()) {
      held.emplace_back(node, std::move(node->grad));
    }
    node->grad.assign(node->value.size(), T(0));
  }
  node_->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward_fn) node->backward_fn(*node);
  }
  for (auto& [node, previous] : held) {
    for (std::size_t i = 0; i < previous.size(); ++i) node->grad[i] += previous[i];
  }
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return from_data(shape(), node_->value, false);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace stec
