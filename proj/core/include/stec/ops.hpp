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

#ifndef STEC_OPS_HPP_
#define STEC_OPS_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "stec/tensor.hpp"

// Differentiable operations. No operation broadcasts: operands must agree in
// shape exactly unless the signature says otherwise.
namespace stec::ops {

// [m,k] x [k,n] -> [m,n].
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// Batched matmul: [g,m,k] x [g,k,n] -> [g,m,n].
template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b);

// Affine map over the last axis: x[..., in] * w[in, out] + bias[out].
// `bias` may be undefined.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> hadamard(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

// Max-subtracted softmax along `axis`.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);

// Removes `axis`. A rank-1 input reduces to shape [1].
template <typename T>
Tensor<T> reduce_sum(const Tensor<T>& x, std::size_t axis);

template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& x, std::size_t axis);

// Sum of every element, shape [1].
template <typename T>
Tensor<T> sum(const Tensor<T>& x);

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

// Output axis i is input axis `axes[i]`.
template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& axes);

// Row select from a [k,d] table; backward scatters into the selected rows.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table,
                      std::span<const std::uint32_t> rows);

enum class NormMode { kTrain, kInference };

template <typename T>
struct BatchNormStats {
  std::vector<T> running_mean;
  std::vector<T> running_var;
  T momentum = T(0.1);
  T eps = T(1e-5);

  explicit BatchNormStats(std::size_t width = 0)
      : running_mean(width, T(0)), running_var(width, T(1)) {}
};

// Per-column normalization of x[B,D]. Training mode uses the biased batch
// variance for normalization and folds the unbiased one into `stats`.
template <typename T>
Tensor<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, BatchNormStats<T>& stats,
                    NormMode mode);

// Normalization over the last axis with learned gain and shift.
template <typename T>
Tensor<T> layernorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, T eps = T(1e-5));

// Inverted dropout; identity when rate == 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, std::mt19937_64& rng);

}  // namespace stec::ops

#endif  // STEC_OPS_HPP_
