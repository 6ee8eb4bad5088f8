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

#ifndef STEC_TENSOR_HPP_
#define STEC_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stec/errors.hpp"

namespace stec {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

// Toggles the post-op scan for NaN/Inf. On by default in debug builds only.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

template <typename T>
struct Node;

template <typename T>
using BackwardFn = std::function<void(Node<T>&)>;

// One value in a define-by-run graph. Parents are owned by the child, so a
// graph lives exactly as long as the tensors that reference its outputs.
template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn<T> backward_fn;
  const char* op = "leaf";

  bool is_leaf() const { return parents.empty(); }
};

// Returns the gradient buffer of `node`, allocating it on first use, or an
// empty span when the node does not take part in differentiation. Backward
// rules accumulate into the returned span.
template <typename T>
std::span<T> grad_sink(Node<T>& node);

// Handle to a graph node. Copies share the node.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<T> data,
                          bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  // Builds the output of an operation. The node requires grad when any
  // parent does; `backward` is dropped otherwise.
  static Tensor from_op(const char* op, Shape shape, std::vector<T> value,
                        std::vector<Tensor> parents, BackwardFn<T> backward);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const T> data() const;
  std::span<T> mutable_data();
  T item() const;
  T at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const;
  std::span<const T> grad() const;
  std::span<T> mutable_grad();
  void zero_grad();

  // Reverse-mode sweep from this scalar. Interior gradients are recomputed
  // from scratch on every call; leaf gradients accumulate.
  void backward() const;

  // Value copy cut off from the graph.
  Tensor detach() const;

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  std::shared_ptr<Node<T>> node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

// Nodes reachable from `root`, parents before children. Only nodes taking
// part in differentiation are listed.
template <typename T>
std::vector<Node<T>*> topological_order(const Tensor<T>& root);

}  // namespace stec

#endif  // STEC_TENSOR_HPP_
