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

#ifndef STEC_BLOCK_HPP_
#define STEC_BLOCK_HPP_

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stec/tensor.hpp"

// Field attention block whose pre-softmax logits are exposed as bilinear
// interactions.
//
// Layout conventions, with B instances, f fields, d = H * dh:
//   x, block output           [B, f, d]
//   projections Q, K, V       [B, f, H, dh]
//   bilinear_pairs            [B, f_key, f_query, H, dh]
//   logits, attention weights [B, H, f_query, f_key]
//
// Entry (b, i, j, h, :) of bilinear_pairs is K(b, i, h, :) * Q(b, j, h, :)
// elementwise, so its sum over dh is the unscaled logit between key field i
// and query field j in head h. Keeping heads inner to d means the
// head-concatenated bilinear tensor [B, f, f, d] is a plain reshape.
namespace stec {

template <typename T>
using NamedTensors = std::vector<std::pair<std::string, Tensor<T>>>;

struct BlockOptions {
  bool use_ffn = true;
  // Bilinear tensor from a separate per-head weight instead of the
  // attention projections.
  bool explicit_bilinear = false;
  bool residual = false;
  bool layer_norm = false;
  double dropout = 0.0;
};

template <typename T>
struct StecBlockParams {
  std::size_t dim = 0;
  std::size_t heads = 1;
  std::size_t ffn_dim = 0;
  Tensor<T> w_query;  // [d, d]
  Tensor<T> w_key;    // [d, d]
  Tensor<T> w_value;  // [d, d]
  Tensor<T> ffn_w1;   // [d, ffn_dim]
  Tensor<T> ffn_b1;   // [ffn_dim]
  Tensor<T> ffn_w2;   // [ffn_dim, d]
  Tensor<T> ffn_b2;   // [d]
  Tensor<T> w_bilinear;  // [H, dh, dh], explicit bilinear only
  Tensor<T> ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;

  std::size_t head_dim() const { return dim / heads; }

  // Fan-in scaled uniform initialization. Throws if d is not a multiple of
  // the head count.
  static StecBlockParams init(std::size_t dim, std::size_t heads,
                              std::size_t ffn_dim, const BlockOptions& options,
                              std::mt19937_64& rng);

  void collect(const std::string& prefix, NamedTensors<T>& out) const;
};

// Standalone bilinear layer applied to the last block's output. Implicit
// form projects query and key; explicit form uses a per-head weight.
template <typename T>
struct BilinearLayerParams {
  std::size_t dim = 0;
  std::size_t heads = 1;
  Tensor<T> w_query;     // [d, d], implicit
  Tensor<T> w_key;       // [d, d], implicit
  Tensor<T> w_bilinear;  // [H, dh, dh], explicit

  static BilinearLayerParams init(std::size_t dim, std::size_t heads,
                                  bool explicit_bilinear,
                                  std::mt19937_64& rng);

  void collect(const std::string& prefix, NamedTensors<T>& out) const;
};

template <typename T>
struct Projections {
  Tensor<T> query;
  Tensor<T> key;
  Tensor<T> value;
};

template <typename T>
struct AttentionResult {
  Tensor<T> output;    // [B, f, H, dh]
  Tensor<T> bilinear;  // [B, f, f, H, dh]
  Tensor<T> logits;    // [B, H, f_query, f_key], already scaled by 1/sqrt(dh)
  Tensor<T> weights;   // softmax of logits over the key axis
};

template <typename T>
struct BlockOutput {
  Tensor<T> output;     // [B, f, d], fed to the next block
  Tensor<T> attention;  // [B, f, d], attention output before the FFN
  Tensor<T> bilinear;   // [B, f, f, d], heads concatenated along d
  Tensor<T> logits;
  Tensor<T> weights;
};

// out[g, i, j, :] = a[g, i, :] * b[g, j, :] for a, b of shape [G, f, e].
template <typename T>
Tensor<T> pairwise_hadamard(const Tensor<T>& a, const Tensor<T>& b);

// Bias-free per-head projections of x[B, f, d].
template <typename T>
Projections<T> project(const Tensor<T>& x, const StecBlockParams<T>& params);

template <typename T>
Tensor<T> bilinear_pairs(const Tensor<T>& query, const Tensor<T>& key);

// Scaled dot-product attention computed through the bilinear tensor.
template <typename T>
AttentionResult<T> attention(const Tensor<T>& query, const Tensor<T>& key,
                             const Tensor<T>& value);

// Logits via batched matmul, [B, H, f_query, f_key], scaled.
template <typename T>
Tensor<T> attention_logits_direct(const Tensor<T>& query,
                                  const Tensor<T>& key);

// (x_i W_h) * x_j per head for x[B, f, d] and W[H, dh, dh] -> [B, f, f, d].
template <typename T>
Tensor<T> explicit_bilinear(const Tensor<T>& x, const Tensor<T>& w_bilinear);

template <typename T>
Tensor<T> ffn(const Tensor<T>& x, const StecBlockParams<T>& params,
              double dropout = 0.0, std::mt19937_64* rng = nullptr);

template <typename T>
BlockOutput<T> block_forward(const Tensor<T>& x,
                             const StecBlockParams<T>& params,
                             const BlockOptions& options,
                             std::mt19937_64* rng = nullptr);

// Bilinear tensor [B, f, f, d] of the standalone layer.
template <typename T>
Tensor<T> bilinear_layer_forward(const Tensor<T>& x,
                                 const BilinearLayerParams<T>& params);

}  // namespace stec

#endif  // STEC_BLOCK_HPP_
