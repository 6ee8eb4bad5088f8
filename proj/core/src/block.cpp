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

#include "stec/block.hpp"

#include <cmath>

#include "stec/ops.hpp"

namespace stec {

namespace {

void check_heads(std::size_t dim, std::size_t heads) {
  if (heads == 0 || dim % heads != 0) {
    throw DimensionError("model dimension " + std::to_string(dim) +
                         " is not divisible by head count " +
                         std::to_string(heads));
  }
}

template <typename T>
Tensor<T> uniform(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> values(numel(shape));
  for (T& v : values) v = static_cast<T>(dist(rng));
  return Tensor<T>::from_data(std::move(shape), std::move(values), true);
}

template <typename T>
Tensor<T> constant(std::size_t n, T value) {
  return Tensor<T>::full({n}, value, true);
}

template <typename T>
void add_if(NamedTensors<T>& out, const std::string& name,
            const Tensor<T>& t) {
  if (t.defined()) out.emplace_back(name, t);
}

// weights[B, H, fq, fk] applied to value[B, f, H, dh] -> [B, f, H, dh].
template <typename T>
Tensor<T> weighted_values(const Tensor<T>& weights, const Tensor<T>& value) {
  const std::size_t b = value.dim(0), f = value.dim(1), h = value.dim(2),
                    dh = value.dim(3);
  auto v = ops::reshape(ops::permute(value, {0, 2, 1, 3}), {b * h, f, dh});
  auto w = ops::reshape(weights, {b * h, f, f});
  auto out = ops::reshape(ops::bmm(w, v), {b, h, f, dh});
  return ops::permute(out, {0, 2, 1, 3});
}

template <typename T>
void check_projection(const char* op, const Tensor<T>& t) {
  if (t.rank() != 4) {
    throw DimensionError(std::string(op) +
                         ": expected [B, f, H, dh] projection, got " +
                         to_string(t.shape()));
  }
}

}  // namespace

template <typename T>
StecBlockParams<T> StecBlockParams<T>::init(std::size_t dim, std::size_t heads,
                                            std::size_t ffn_dim,
                                            const BlockOptions& options,
                                            std::mt19937_64& rng) {
  check_heads(dim, heads);
  StecBlockParams p;
  p.dim = dim;
  p.heads = heads;
  p.ffn_dim = ffn_dim;
  p.w_query = uniform<T>({dim, dim}, dim, rng);
  p.w_key = uniform<T>({dim, dim}, dim, rng);
  p.w_value = uniform<T>({dim, dim}, dim, rng);
  if (options.use_ffn) {
    if (ffn_dim == 0) throw ValueError("FFN hidden size must be at least 1");
    p.ffn_w1 = uniform<T>({dim, ffn_dim}, dim, rng);
    p.ffn_b1 = constant<T>(ffn_dim, T(0));
    p.ffn_w2 = uniform<T>({ffn_dim, dim}, ffn_dim, rng);
    p.ffn_b2 = constant<T>(dim, T(0));
  }
  if (options.explicit_bilinear) {
    const std::size_t dh = dim / heads;
    p.w_bilinear = uniform<T>({heads, dh, dh}, dh, rng);
  }
  if (options.layer_norm) {
    p.ln1_gamma = constant<T>(dim, T(1));
    p.ln1_beta = constant<T>(dim, T(0));
    if (options.use_ffn) {
      p.ln2_gamma = constant<T>(dim, T(1));
      p.ln2_beta = constant<T>(dim, T(0));
    }
  }
  return p;
}

template <typename T>
void StecBlockParams<T>::collect(const std::string& prefix,
                                 NamedTensors<T>& out) const {
  add_if(out, prefix + ".w_query", w_query);
  add_if(out, prefix + ".w_key", w_key);
  add_if(out, prefix + ".w_value", w_value);
  add_if(out, prefix + ".ffn_w1", ffn_w1);
  add_if(out, prefix + ".ffn_b1", ffn_b1);
  add_if(out, prefix + ".ffn_w2", ffn_w2);
  add_if(out, prefix + ".ffn_b2", ffn_b2);
  add_if(out, prefix + ".w_bilinear", w_bilinear);
  add_if(out, prefix + ".ln1_gamma", ln1_gamma);
  add_if(out, prefix + ".ln1_beta", ln1_beta);
  add_if(out, prefix + ".ln2_gamma", ln2_gamma);
  add_if(out, prefix + ".ln2_beta", ln2_beta);
}

template <typename T>
BilinearLayerParams<T> BilinearLayerParams<T>::init(std::size_t dim,
                                                    std::size_t heads,
                                                    bool explicit_bilinear,
                                                    std::mt19937_64& rng) {
  check_heads(dim, heads);
  BilinearLayerParams p;
  p.dim = dim;
  p.heads = heads;
  if (explicit_bilinear) {
    const std::size_t dh = dim / heads;
    p.w_bilinear = uniform<T>({heads, dh, dh}, dh, rng);
  } else {
    p.w_query = uniform<T>({dim, dim}, dim, rng);
    p.w_key = uniform<T>({dim, dim}, dim, rng);
  }
  return p;
}

template <typename T>
void BilinearLayerParams<T>::collect(const std::string& prefix,
                                     NamedTensors<T>& out) const {
  add_if(out, prefix + ".w_query", w_query);
  add_if(out, prefix + ".w_key", w_key);
  add_if(out, prefix + ".w_bilinear", w_bilinear);
}

template <typename T>
Tensor<T> pairwise_hadamard(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 3 || a.shape() != b.shape()) {
    throw DimensionError("pairwise_hadamard: incompatible shapes " +
                         to_string(a.shape()) + " and " +
                         to_string(b.shape()));
  }
  const std::size_t g = a.dim(0), f = a.dim(1), e = a.dim(2);
  const auto av = a.data(), bv = b.data();
  std::vector<T> out(g * f * f * e);
  for (std::size_t n = 0; n < g; ++n) {
    for (std::size_t i = 0; i < f; ++i) {
      const T* ai = av.data() + (n * f + i) * e;
      for (std::size_t j = 0; j < f; ++j) {
        const T* bj = bv.data() + (n * f + j) * e;
        T* dst = out.data() + ((n * f + i) * f + j) * e;
        for (std::size_t c = 0; c < e; ++c) dst[c] = ai[c] * bj[c];
      }
    }
  }
  return Tensor<T>::from_op(
      "pairwise_hadamard", {g, f, f, e}, std::move(out), {a, b},
      [g, f, e](Node<T>& self) {
        const std::vector<T>& av = self.parents[0]->value;
        const std::vector<T>& bv = self.parents[1]->value;
        auto ga = grad_sink(*self.parents[0]);
        auto gb = grad_sink(*self.parents[1]);
        for (std::size_t n = 0; n < g; ++n) {
          for (std::size_t i = 0; i < f; ++i) {
            const std::size_t ia = (n * f + i) * e;
            for (std::size_t j = 0; j < f; ++j) {
              const std::size_t jb = (n * f + j) * e;
              const T* dy = self.grad.data() + ((n * f + i) * f + j) * e;
              for (std::size_t c = 0; c < e; ++c) {
                if (!ga.empty()) ga[ia + c] += dy[c] * bv[jb + c];
                if (!gb.empty()) gb[jb + c] += dy[c] * av[ia + c];
              }
            }
          }
        }
      });
}

template <typename T>
Projections<T> project(const Tensor<T>& x, const StecBlockParams<T>& params) {
  check_heads(params.dim, params.heads);
  if (x.rank() != 3 || x.dim(2) != params.dim) {
    throw DimensionError("project: expected [B, f, " +
                         std::to_string(params.dim) + "] input, got " +
                         to_string(x.shape()));
  }
  const Shape split{x.dim(0), x.dim(1), params.heads, params.head_dim()};
  const Tensor<T> none;
  return {ops::reshape(ops::linear(x, params.w_query, none), split),
          ops::reshape(ops::linear(x, params.w_key, none), split),
          ops::reshape(ops::linear(x, params.w_value, none), split)};
}

template <typename T>
Tensor<T> bilinear_pairs(const Tensor<T>& query, const Tensor<T>& key) {
  check_projection("bilinear_pairs", query);
  check_projection("bilinear_pairs", key);
  if (query.shape() != key.shape()) {
    throw DimensionError("bilinear_pairs: query " + to_string(query.shape()) +
                         " and key " + to_string(key.shape()) + " differ");
  }
  const std::size_t b = query.dim(0), f = query.dim(1), h = query.dim(2),
                    dh = query.dim(3);
  auto k = ops::reshape(key, {b, f, h * dh});
  auto q = ops::reshape(query, {b, f, h * dh});
  return ops::reshape(pairwise_hadamard(k, q), {b, f, f, h, dh});
}

template <typename T>
AttentionResult<T> attention(const Tensor<T>& query, const Tensor<T>& key,
                             const Tensor<T>& value) {
  if (value.shape() != query.shape()) {
    throw DimensionError("attention: value " + to_string(value.shape()) +
                         " does not match query " + to_string(query.shape()));
  }
  AttentionResult<T> result;
  result.bilinear = bilinear_pairs(query, key);
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(query.dim(3)));
  // [B, f_key, f_query, H] -> [B, H, f_query, f_key]
  auto raw = ops::reduce_sum(result.bilinear, 4);
  result.logits = ops::permute(ops::scale(raw, inv_sqrt), {0, 3, 2, 1});
  result.weights = ops::softmax(result.logits, 3);
  result.output = weighted_values(result.weights, value);
  return result;
}

template <typename T>
Tensor<T> attention_logits_direct(const Tensor<T>& query,
                                  const Tensor<T>& key) {
  check_projection("attention_logits_direct", query);
  if (query.shape() != key.shape()) {
    throw DimensionError("attention_logits_direct: query and key differ");
  }
  const std::size_t b = query.dim(0), f = query.dim(1), h = query.dim(2),
                    dh = query.dim(3);
  auto q = ops::reshape(ops::permute(query, {0, 2, 1, 3}), {b * h, f, dh});
  auto kt = ops::reshape(ops::permute(key, {0, 2, 3, 1}), {b * h, dh, f});
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  return ops::scale(ops::reshape(ops::bmm(q, kt), {b, h, f, f}), inv_sqrt);
}

template <typename T>
Tensor<T> explicit_bilinear(const Tensor<T>& x, const Tensor<T>& w_bilinear) {
  if (x.rank() != 3 || w_bilinear.rank() != 3 ||
      w_bilinear.dim(0) * w_bilinear.dim(1) != x.dim(2) ||
      w_bilinear.dim(1) != w_bilinear.dim(2)) {
    throw DimensionError("explicit_bilinear: input " + to_string(x.shape()) +
                         " does not match weight " +
                         to_string(w_bilinear.shape()));
  }
  const std::size_t b = x.dim(0), f = x.dim(1), d = x.dim(2);
  const std::size_t h = w_bilinear.dim(0), dh = w_bilinear.dim(1);
  auto per_head = ops::permute(ops::reshape(x, {b * f, h, dh}), {1, 0, 2});
  auto mixed = ops::permute(ops::bmm(per_head, w_bilinear), {1, 0, 2});
  auto left = ops::reshape(mixed, {b, f, d});
  return pairwise_hadamard(left, x);
}

template <typename T>
Tensor<T> ffn(const Tensor<T>& x, const StecBlockParams<T>& params,
              double dropout, std::mt19937_64* rng) {
  if (!params.ffn_w1.defined()) {
    throw ValueError("ffn: block was built without FFN parameters");
  }
  auto hidden = ops::relu(ops::linear(x, params.ffn_w1, params.ffn_b1));
  if (dropout > 0.0 && rng) hidden = ops::dropout(hidden, dropout, *rng);
  return ops::linear(hidden, params.ffn_w2, params.ffn_b2);
}

template <typename T>
BlockOutput<T> block_forward(const Tensor<T>& x,
                             const StecBlockParams<T>& params,
                             const BlockOptions& options,
                             std::mt19937_64* rng) {
  const auto proj = project(x, params);
  const std::size_t b = x.dim(0), f = x.dim(1), d = x.dim(2);
  BlockOutput<T> out;
  Tensor<T> attended;
  if (options.explicit_bilinear) {
    out.logits = attention_logits_direct(proj.query, proj.key);
    out.weights = ops::softmax(out.logits, 3);
    attended = weighted_values(out.weights, proj.value);
    out.bilinear = explicit_bilinear(x, params.w_bilinear);
  } else {
    auto att = attention(proj.query, proj.key, proj.value);
    out.logits = att.logits;
    out.weights = att.weights;
    attended = att.output;
    out.bilinear = ops::reshape(att.bilinear, {b, f, f, d});
  }
  Tensor<T> hidden = ops::reshape(attended, {b, f, d});
  if (options.residual) hidden = ops::add(hidden, x);
  if (options.layer_norm) {
    hidden = ops::layernorm(hidden, params.ln1_gamma, params.ln1_beta);
  }
  out.attention = hidden;
  if (!options.use_ffn) {
    out.output = hidden;
    return out;
  }
  Tensor<T> y = ffn(hidden, params, options.dropout, rng);
  if (options.residual) y = ops::add(y, hidden);
  if (options.layer_norm) {
    y = ops::layernorm(y, params.ln2_gamma, params.ln2_beta);
  }
  out.output = y;
  return out;
}

template <typename T>
Tensor<T> bilinear_layer_forward(const Tensor<T>& x,
                                 const BilinearLayerParams<T>& params) {
  if (params.w_bilinear.defined()) {
    return explicit_bilinear(x, params.w_bilinear);
  }
  if (x.rank() != 3 || x.dim(2) != params.dim) {
    throw DimensionError("bilinear layer: expected [B, f, " +
                         std::to_string(params.dim) + "] input, got " +
                         to_string(x.shape()));
  }
  const Tensor<T> none;
  auto q = ops::linear(x, params.w_query, none);
  auto k = ops::linear(x, params.w_key, none);
  return pairwise_hadamard(k, q);
}

#define STEC_INSTANTIATE_BLOCK(T)                                             \
  template struct StecBlockParams<T>;                                         \
  template struct BilinearLayerParams<T>;                                     \
  template Tensor<T> pairwise_hadamard(const Tensor<T>&, const Tensor<T>&);   \
  template Projections<T> project(const Tensor<T>&,                           \
                                  const StecBlockParams<T>&);                 \
  template Tensor<T> bilinear_pairs(const Tensor<T>&, const Tensor<T>&);      \
  template AttentionResult<T> attention(const Tensor<T>&, const Tensor<T>&,   \
                                        const Tensor<T>&);                    \
  template Tensor<T> attention_logits_direct(const Tensor<T>&,                \
                                             const Tensor<T>&);               \
  template Tensor<T> explicit_bilinear(const Tensor<T>&, const Tensor<T>&);   \
  template Tensor<T> ffn(const Tensor<T>&, const StecBlockParams<T>&, double, \
                         std::mt19937_64*);                                   \
  template BlockOutput<T> block_forward(const Tensor<T>&,                     \
                                        const StecBlockParams<T>&,            \
                                        const BlockOptions&,                  \
                                        std::mt19937_64*);                    \
  template Tensor<T> bilinear_layer_forward(const Tensor<T>&,                 \
                                            const BilinearLayerParams<T>&);

STEC_INSTANTIATE_BLOCK(float)
STEC_INSTANTIATE_BLOCK(double)

#undef STEC_INSTANTIATE_BLOCK

}  // namespace stec
