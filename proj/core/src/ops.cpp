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

#include "stec/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace stec::ops {

namespace {

[[noreturn]] void shape_mismatch(const char* op, const Shape& a,
                                 const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       to_string(a) + " and " + to_string(b));
}

void require_rank(const char* op, const Shape& s, std::size_t rank) {
  if (s.size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got shape " + to_string(s));
  }
}

void require_axis(const char* op, const Shape& s, std::size_t axis) {
  if (axis >= s.size()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for shape " + to_string(s));
  }
}

// Splits a shape around `axis` into (outer, extent, inner) strides.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
  AxisSplit split;
  for (std::size_t i = 0; i < axis; ++i) split.outer *= s[i];
  split.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) split.inner *= s[i];
  return split;
}

// c[m,n] += a[m,k] * b[k,n]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    T* ci = c + i * n;
    const T* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ai[p];
      if (av == T(0)) continue;
      const T* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// c[m,k] += a[m,n] * b[k,n]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t n,
             std::size_t k) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a + i * n;
    T* ci = c + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T* bp = b + p * n;
      T acc = T(0);
      for (std::size_t j = 0; j < n; ++j) acc += ai[j] * bp[j];
      ci[p] += acc;
    }
  }
}

// c[k,n] += a[m,k]^T * b[m,n]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* ai = a + i * k;
    const T* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ai[p];
      if (av == T(0)) continue;
      T* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("matmul", a.shape(), 2);
  require_rank("matmul", b.shape(), 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) shape_mismatch("matmul", a.shape(), b.shape());
  std::vector<T> out(m * n, T(0));
  gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  return Tensor<T>::from_op(
      "matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node<T>& self) {
        Node<T>& pa = *self.parents[0];
        Node<T>& pb = *self.parents[1];
        if (auto ga = grad_sink(pa); !ga.empty()) {
          gemm_nt(self.grad.data(), pb.value.data(), ga.data(), m, n, k);
        }
        if (auto gb = grad_sink(pb); !gb.empty()) {
          gemm_tn(pa.value.data(), self.grad.data(), gb.data(), m, k, n);
        }
      });
}

template <typename T>
Tensor<T> bmm(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank("bmm", a.shape(), 3);
  require_rank("bmm", b.shape(), 3);
  const std::size_t g = a.dim(0), m = a.dim(1), k = a.dim(2), n = b.dim(2);
  if (b.dim(0) != g || b.dim(1) != k) {
    shape_mismatch("bmm", a.shape(), b.shape());
  }
  std::vector<T> out(g * m * n, T(0));
  for (std::size_t i = 0; i < g; ++i) {
    gemm_nn(a.data().data() + i * m * k, b.data().data() + i * k * n,
            out.data() + i * m * n, m, k, n);
  }
  return Tensor<T>::from_op(
      "bmm", {g, m, n}, std::move(out), {a, b}, [g, m, k, n](Node<T>& self) {
        Node<T>& pa = *self.parents[0];
        Node<T>& pb = *self.parents[1];
        auto ga = grad_sink(pa);
        auto gb = grad_sink(pb);
        for (std::size_t i = 0; i < g; ++i) {
          const T* dc = self.grad.data() + i * m * n;
          if (!ga.empty()) {
            gemm_nt(dc, pb.value.data() + i * k * n, ga.data() + i * m * k, m,
                    n, k);
          }
          if (!gb.empty()) {
            gemm_tn(pa.value.data() + i * m * k, dc, gb.data() + i * k * n, m,
                    k, n);
          }
        }
      });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias) {
  require_rank("linear", weight.shape(), 2);
  const Shape& xs = x.shape();
  if (xs.empty() || xs.back() != weight.dim(0)) {
    shape_mismatch("linear", xs, weight.shape());
  }
  const std::size_t in = weight.dim(0), out_dim = weight.dim(1);
  const std::size_t rows = x.size() / in;
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != out_dim)) {
    shape_mismatch("linear bias", weight.shape(), bias.shape());
  }
  std::vector<T> out(rows * out_dim, T(0));
  if (has_bias) {
    const auto bv = bias.data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(bv.begin(), bv.end(), out.begin() + r * out_dim);
    }
  }
  gemm_nn(x.data().data(), weight.data().data(), out.data(), rows, in,
          out_dim);
  Shape out_shape = xs;
  out_shape.back() = out_dim;
  std::vector<Tensor<T>> parents{x, weight};
  if (has_bias) parents.push_back(bias);
  return Tensor<T>::from_op(
      "linear", std::move(out_shape), std::move(out), std::move(parents),
      [rows, in, out_dim, has_bias](Node<T>& self) {
        Node<T>& px = *self.parents[0];
        Node<T>& pw = *self.parents[1];
        if (auto gx = grad_sink(px); !gx.empty()) {
          gemm_nt(self.grad.data(), pw.value.data(), gx.data(), rows, out_dim,
                  in);
        }
        if (auto gw = grad_sink(pw); !gw.empty()) {
          gemm_tn(px.value.data(), self.grad.data(), gw.data(), rows, in,
                  out_dim);
        }
        if (has_bias) {
          if (auto gb = grad_sink(*self.parents[2]); !gb.empty()) {
            for (std::size_t r = 0; r < rows; ++r) {
              const T* dy = self.grad.data() + r * out_dim;
              for (std::size_t o = 0; o < out_dim; ++o) gb[o] += dy[o];
            }
          }
        }
      });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) shape_mismatch("add", a.shape(), b.shape());
  std::vector<T> out(a.size());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return Tensor<T>::from_op("add", a.shape(), std::move(out), {a, b},
                            [](Node<T>& self) {
                              for (auto& parent : self.parents) {
                                auto g = grad_sink(*parent);
                                for (std::size_t i = 0; i < g.size(); ++i) {
                                  g[i] += self.grad[i];
                                }
                              }
                            });
}

template <typename T>
Tensor<T> hadamard(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    shape_mismatch("hadamard", a.shape(), b.shape());
  }
  std::vector<T> out(a.size());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return Tensor<T>::from_op(
      "hadamard", a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
        Node<T>& pa = *self.parents[0];
        Node<T>& pb = *self.parents[1];
        if (auto ga = grad_sink(pa); !ga.empty()) {
          for (std::size_t i = 0; i < ga.size(); ++i) {
            ga[i] += self.grad[i] * pb.value[i];
          }
        }
        if (auto gb = grad_sink(pb); !gb.empty()) {
          for (std::size_t i = 0; i < gb.size(); ++i) {
            gb[i] += self.grad[i] * pa.value[i];
          }
        }
      });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.data().begin(), x.data().end());
  for (T& v : out) v *= factor;
  return Tensor<T>::from_op("scale", x.shape(), std::move(out), {x},
                            [factor](Node<T>& self) {
                              auto g = grad_sink(*self.parents[0]);
                              for (std::size_t i = 0; i < g.size(); ++i) {
                                g[i] += factor * self.grad[i];
                              }
                            });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> out(x.data().begin(), x.data().end());
  for (T& v : out) v = v > T(0) ? v : T(0);
  return Tensor<T>::from_op("relu", x.shape(), std::move(out), {x},
                            [](Node<T>& self) {
                              auto g = grad_sink(*self.parents[0]);
                              for (std::size_t i = 0; i < g.size(); ++i) {
                                if (self.value[i] > T(0)) g[i] += self.grad[i];
                              }
                            });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  std::vector<T> out(x.size());
  const auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Branches keep exp() from overflowing for large |x|.
    if (xv[i] >= T(0)) {
      out[i] = T(1) / (T(1) + std::exp(-xv[i]));
    } else {
      const T e = std::exp(xv[i]);
      out[i] = e / (T(1) + e);
    }
  }
  return Tensor<T>::from_op("sigmoid", x.shape(), std::move(out), {x},
                            [](Node<T>& self) {
                              auto g = grad_sink(*self.parents[0]);
                              for (std::size_t i = 0; i < g.size(); ++i) {
                                const T y = self.value[i];
                                g[i] += self.grad[i] * y * (T(1) - y);
                              }
                            });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  require_axis("softmax", x.shape(), axis);
  const AxisSplit s = split_at(x.shape(), axis);
  const auto xv = x.data();
  std::vector<T> out(x.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.extent * s.inner + in;
      T peak = xv[base];
      for (std::size_t e = 1; e < s.extent; ++e) {
        peak = std::max(peak, xv[base + e * s.inner]);
      }
      T total = T(0);
      for (std::size_t e = 0; e < s.extent; ++e) {
        const std::size_t at = base + e * s.inner;
        out[at] = std::exp(xv[at] - peak);
        total += out[at];
      }
      for (std::size_t e = 0; e < s.extent; ++e) {
        out[base + e * s.inner] /= total;
      }
    }
  }
  return Tensor<T>::from_op(
      "softmax", x.shape(), std::move(out), {x}, [s](Node<T>& self) {
        auto g = grad_sink(*self.parents[0]);
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t in = 0; in < s.inner; ++in) {
            const std::size_t base = o * s.extent * s.inner + in;
            T dot = T(0);
            for (std::size_t e = 0; e < s.extent; ++e) {
              const std::size_t at = base + e * s.inner;
              dot += self.grad[at] * self.value[at];
            }
            for (std::size_t e = 0; e < s.extent; ++e) {
              const std::size_t at = base + e * s.inner;
              g[at] += self.value[at] * (self.grad[at] - dot);
            }
          }
        }
      });
}

namespace {

Shape drop_axis(const Shape& s, std::size_t axis) {
  Shape out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != axis) out.push_back(s[i]);
  }
  if (out.empty()) out.push_back(1);
  return out;
}

template <typename T>
Tensor<T> reduce_axis(const char* op, const Tensor<T>& x, std::size_t axis,
                      T weight) {
  require_axis(op, x.shape(), axis);
  const AxisSplit s = split_at(x.shape(), axis);
  const auto xv = x.data();
  std::vector<T> out(s.outer * s.inner, T(0));
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t e = 0; e < s.extent; ++e) {
      const T* row = xv.data() + (o * s.extent + e) * s.inner;
      T* dst = out.data() + o * s.inner;
      for (std::size_t in = 0; in < s.inner; ++in) dst[in] += row[in];
    }
  }
  if (weight != T(1)) {
    for (T& v : out) v *= weight;
  }
  return Tensor<T>::from_op(
      op, drop_axis(x.shape(), axis), std::move(out), {x},
      [s, weight](Node<T>& self) {
        auto g = grad_sink(*self.parents[0]);
        for (std::size_t o = 0; o < s.outer; ++o) {
          const T* src = self.grad.data() + o * s.inner;
          for (std::size_t e = 0; e < s.extent; ++e) {
            T* row = g.data() + (o * s.extent + e) * s.inner;
            for (std::size_t in = 0; in < s.inner; ++in) {
              row[in] += weight * src[in];
            }
          }
        }
      });
}

}  // namespace

template <typename T>
Tensor<T> reduce_sum(const Tensor<T>& x, std::size_t axis) {
  return reduce_axis("reduce_sum", x, axis, T(1));
}

template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& x, std::size_t axis) {
  require_axis("reduce_mean", x.shape(), axis);
  return reduce_axis("reduce_mean", x, axis,
                     T(1) / static_cast<T>(x.dim(axis)));
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = T(0);
  for (T v : x.data()) total += v;
  return Tensor<T>::from_op("sum", {1}, {total}, {x}, [](Node<T>& self) {
    auto g = grad_sink(*self.parents[0]);
    for (T& v : g) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts.front().shape();
  require_axis("concat", first, axis);
  std::size_t total_extent = 0;
  std::vector<std::size_t> extents;
  for (const auto& part : parts) {
    const Shape& s = part.shape();
    if (s.size() != first.size()) shape_mismatch("concat", first, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) shape_mismatch("concat", first, s);
    }
    extents.push_back(s[axis]);
    total_extent += s[axis];
  }
  Shape out_shape = first;
  out_shape[axis] = total_extent;
  const AxisSplit s = split_at(out_shape, axis);
  std::vector<T> out(numel(out_shape));
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto pv = parts[p].data();
    const std::size_t chunk = extents[p] * s.inner;
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(pv.data() + o * chunk, chunk,
                  out.data() + o * total_extent * s.inner + offset * s.inner);
    }
    offset += extents[p];
  }
  return Tensor<T>::from_op(
      "concat", std::move(out_shape), std::move(out), parts,
      [s, extents, total_extent](Node<T>& self) {
        std::size_t offset = 0;
        for (std::size_t p = 0; p < self.parents.size(); ++p) {
          auto g = grad_sink(*self.parents[p]);
          const std::size_t chunk = extents[p] * s.inner;
          if (!g.empty()) {
            for (std::size_t o = 0; o < s.outer; ++o) {
              const T* src = self.grad.data() + o * total_extent * s.inner +
                             offset * s.inner;
              T* dst = g.data() + o * chunk;
              for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
            }
          }
          offset += extents[p];
        }
      });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.size()) shape_mismatch("reshape", x.shape(), shape);
  std::vector<T> out(x.data().begin(), x.data().end());
  return Tensor<T>::from_op("reshape", std::move(shape), std::move(out), {x},
                            [](Node<T>& self) {
                              auto g = grad_sink(*self.parents[0]);
                              for (std::size_t i = 0; i < g.size(); ++i) {
                                g[i] += self.grad[i];
                              }
                            });
}

template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& axes) {
  const Shape& in_shape = x.shape();
  const std::size_t rank = in_shape.size();
  if (axes.size() != rank) {
    throw DimensionError("permute: " + std::to_string(axes.size()) +
                         " axes for shape " + to_string(in_shape));
  }
  std::vector<bool> seen(rank, false);
  for (std::size_t a : axes) {
    if (a >= rank || seen[a]) {
      throw DimensionError("permute: axes are not a permutation");
    }
    seen[a] = true;
  }
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) out_shape[i] = in_shape[axes[i]];
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) {
    in_strides[i - 1] = in_strides[i] * in_shape[i];
  }
  // Input offset of each output element, shared with backward.
  auto source = std::make_shared<std::vector<std::size_t>>(x.size());
  std::vector<std::size_t> index(rank, 0);
  for (std::size_t flat = 0; flat < x.size(); ++flat) {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < rank; ++i) {
      offset += index[i] * in_strides[axes[i]];
    }
    (*source)[flat] = offset;
    for (std::size_t i = rank; i-- > 0;) {
      if (++index[i] < out_shape[i]) break;
      index[i] = 0;
    }
  }
  const auto xv = x.data();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[(*source)[i]];
  return Tensor<T>::from_op("permute", std::move(out_shape), std::move(out),
                            {x}, [source](Node<T>& self) {
                              auto g = grad_sink(*self.parents[0]);
                              for (std::size_t i = 0; i < self.grad.size();
                                   ++i) {
                                g[(*source)[i]] += self.grad[i];
                              }
                            });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table,
                      std::span<const std::uint32_t> rows) {
  require_rank("gather_rows", table.shape(), 2);
  const std::size_t k = table.dim(0), d = table.dim(1);
  if (rows.empty()) throw DimensionError("gather_rows: no rows requested");
  std::vector<std::uint32_t> picked(rows.begin(), rows.end());
  std::vector<T> out(picked.size() * d);
  const auto tv = table.data();
  for (std::size_t r = 0; r < picked.size(); ++r) {
    if (picked[r] >= k) {
      throw DimensionError("gather_rows: row " + std::to_string(picked[r]) +
                           " out of range for table of " + std::to_string(k) +
                           " rows");
    }
    std::copy_n(tv.data() + picked[r] * d, d, out.data() + r * d);
  }
  const std::size_t n = picked.size();
  return Tensor<T>::from_op(
      "gather_rows", {n, d}, std::move(out), {table},
      [picked = std::move(picked), d](Node<T>& self) {
        auto g = grad_sink(*self.parents[0]);
        for (std::size_t r = 0; r < picked.size(); ++r) {
          T* dst = g.data() + picked[r] * d;
          const T* src = self.grad.data() + r * d;
          for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
        }
      });
}

template <typename T>
Tensor<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, BatchNormStats<T>& stats,
                    NormMode mode) {
  require_rank("batchnorm", x.shape(), 2);
  const std::size_t rows = x.dim(0), width = x.dim(1);
  if (gamma.shape() != Shape{width} || beta.shape() != Shape{width}) {
    shape_mismatch("batchnorm", x.shape(), gamma.shape());
  }
  if (stats.running_mean.size() != width ||
      stats.running_var.size() != width) {
    throw DimensionError("batchnorm: running statistics width " +
                         std::to_string(stats.running_mean.size()) +
                         " does not match input width " +
                         std::to_string(width));
  }
  if (mode == NormMode::kTrain && rows < 2) {
    throw ValueError(
        "batchnorm: training mode needs at least 2 rows, batch variance is "
        "undefined for " +
        std::to_string(rows));
  }
  const auto xv = x.data(), gv = gamma.data(), bv = beta.data();
  std::vector<T> mean(width, T(0)), inv_std(width);
  if (mode == NormMode::kTrain) {
    std::vector<T> var(width, T(0));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < width; ++c) mean[c] += xv[r * width + c];
    }
    for (T& m : mean) m /= static_cast<T>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        const T dev = xv[r * width + c] - mean[c];
        var[c] += dev * dev;
      }
    }
    const T biased = T(1) / static_cast<T>(rows);
    const T unbiased = T(1) / static_cast<T>(rows - 1);
    for (std::size_t c = 0; c < width; ++c) {
      inv_std[c] = T(1) / std::sqrt(var[c] * biased + stats.eps);
      stats.running_mean[c] = (T(1) - stats.momentum) * stats.running_mean[c] +
                              stats.momentum * mean[c];
      stats.running_var[c] = (T(1) - stats.momentum) * stats.running_var[c] +
                             stats.momentum * var[c] * unbiased;
    }
  } else {
    for (std::size_t c = 0; c < width; ++c) {
      mean[c] = stats.running_mean[c];
      inv_std[c] = T(1) / std::sqrt(stats.running_var[c] + stats.eps);
    }
  }
  std::vector<T> normalized(rows * width), out(rows * width);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t at = r * width + c;
      normalized[at] = (xv[at] - mean[c]) * inv_std[c];
      out[at] = gv[c] * normalized[at] + bv[c];
    }
  }
  const bool train = mode == NormMode::kTrain;
  return Tensor<T>::from_op(
      "batchnorm", x.shape(), std::move(out), {x, gamma, beta},
      [rows, width, train, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](Node<T>& self) {
        const std::vector<T>& gv = self.parents[1]->value;
        const std::vector<T>& dy = self.grad;
        if (auto gg = grad_sink(*self.parents[1]); !gg.empty()) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
              gg[c] += dy[r * width + c] * normalized[r * width + c];
            }
          }
        }
        if (auto gb = grad_sink(*self.parents[2]); !gb.empty()) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < width; ++c) gb[c] += dy[r * width + c];
          }
        }
        auto gx = grad_sink(*self.parents[0]);
        if (gx.empty()) return;
        if (!train) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < width; ++c) {
              gx[r * width + c] += dy[r * width + c] * gv[c] * inv_std[c];
            }
          }
          return;
        }
        std::vector<T> sum_d(width, T(0)), sum_dn(width, T(0));
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < width; ++c) {
            const T dn = dy[r * width + c] * gv[c];
            sum_d[c] += dn;
            sum_dn[c] += dn * normalized[r * width + c];
          }
        }
        const T inv_rows = T(1) / static_cast<T>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < width; ++c) {
            const std::size_t at = r * width + c;
            const T dn = dy[at] * gv[c];
            gx[at] += inv_std[c] * inv_rows *
                      (static_cast<T>(rows) * dn - sum_d[c] -
                       normalized[at] * sum_dn[c]);
          }
        }
      });
}

template <typename T>
Tensor<T> layernorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, T eps) {
  const Shape& xs = x.shape();
  const std::size_t width = xs.back();
  if (gamma.shape() != Shape{width} || beta.shape() != Shape{width}) {
    shape_mismatch("layernorm", xs, gamma.shape());
  }
  const std::size_t rows = x.size() / width;
  const auto xv = x.data(), gv = gamma.data(), bv = beta.data();
  std::vector<T> normalized(x.size()), out(x.size()), inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * width;
    T mean = T(0), var = T(0);
    for (std::size_t c = 0; c < width; ++c) mean += row[c];
    mean /= static_cast<T>(width);
    for (std::size_t c = 0; c < width; ++c) {
      var += (row[c] - mean) * (row[c] - mean);
    }
    inv_std[r] = T(1) / std::sqrt(var / static_cast<T>(width) + eps);
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t at = r * width + c;
      normalized[at] = (row[c] - mean) * inv_std[r];
      out[at] = gv[c] * normalized[at] + bv[c];
    }
  }
  return Tensor<T>::from_op(
      "layernorm", xs, std::move(out), {x, gamma, beta},
      [rows, width, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](Node<T>& self) {
        const std::vector<T>& gv = self.parents[1]->value;
        const std::vector<T>& dy = self.grad;
        auto gg = grad_sink(*self.parents[1]);
        auto gb = grad_sink(*self.parents[2]);
        auto gx = grad_sink(*self.parents[0]);
        for (std::size_t r = 0; r < rows; ++r) {
          T sum_d = T(0), sum_dn = T(0);
          for (std::size_t c = 0; c < width; ++c) {
            const std::size_t at = r * width + c;
            if (!gg.empty()) gg[c] += dy[at] * normalized[at];
            if (!gb.empty()) gb[c] += dy[at];
            const T dn = dy[at] * gv[c];
            sum_d += dn;
            sum_dn += dn * normalized[at];
          }
          if (gx.empty()) continue;
          const T w = static_cast<T>(width);
          for (std::size_t c = 0; c < width; ++c) {
            const std::size_t at = r * width + c;
            const T dn = dy[at] * gv[c];
            gx[at] += inv_std[r] / w * (w * dn - sum_d - normalized[at] * sum_dn);
          }
        }
      });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ValueError("dropout rate must be in [0, 1), got " +
                     std::to_string(rate));
  }
  if (rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const T scale_kept = T(1) / static_cast<T>(1.0 - rate);
  std::vector<T> mask(x.size());
  for (T& m : mask) m = keep(rng) ? scale_kept : T(0);
  std::vector<T> out(x.size());
  const auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  return Tensor<T>::from_op("dropout", x.shape(), std::move(out), {x},
                            [mask = std::move(mask)](Node<T>& self) {
                              auto g = grad_sink(*self.parents[0]);
                              for (std::size_t i = 0; i < g.size(); ++i) {
                                g[i] += self.grad[i] * mask[i];
                              }
                            });
}

#define STEC_INSTANTIATE_OPS(T)                                               \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> bmm(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&,               \
                            const Tensor<T>&);                                \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> hadamard(const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> scale(const Tensor<T>&, T);                              \
  template Tensor<T> relu(const Tensor<T>&);                                  \
  template Tensor<T> sigmoid(const Tensor<T>&);                               \
  template Tensor<T> softmax(const Tensor<T>&, std::size_t);                  \
  template Tensor<T> reduce_sum(const Tensor<T>&, std::size_t);               \
  template Tensor<T> reduce_mean(const Tensor<T>&, std::size_t);              \
  template Tensor<T> sum(const Tensor<T>&);                                   \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);      \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                        \
  template Tensor<T> permute(const Tensor<T>&,                                \
                             const std::vector<std::size_t>&);                \
  template Tensor<T> gather_rows(const Tensor<T>&,                            \
                                 std::span<const std::uint32_t>);             \
  template Tensor<T> batchnorm(const Tensor<T>&, const Tensor<T>&,            \
                               const Tensor<T>&, BatchNormStats<T>&,          \
                               NormMode);                                     \
  template Tensor<T> layernorm(const Tensor<T>&, const Tensor<T>&,            \
                               const Tensor<T>&, T);                          \
  template Tensor<T> dropout(const Tensor<T>&, double, std::mt19937_64&);

STEC_INSTANTIATE_OPS(float)
STEC_INSTANTIATE_OPS(double)

#undef STEC_INSTANTIATE_OPS

}  // namespace stec::ops
