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

#ifndef STEC_TESTS_SUPPORT_ORACLES_HPP_
#define STEC_TESTS_SUPPORT_ORACLES_HPP_

// Reference implementations written without the library's kernels, used as
// independent oracles by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace stec::testing {

// Row-major [m,k] x [k,n] by the textbook triple loop.
inline std::vector<double> naive_matmul(std::span<const double> a,
                                        std::span<const double> b,
                                        std::size_t m, std::size_t k,
                                        std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
  return c;
}

// Central differences of a scalar function of a flat vector.
inline std::vector<double> numeric_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double plus = f(x);
    x[i] = saved - h;
    const double minus = f(x);
    x[i] = saved;
    g[i] = (plus - minus) / (2.0 * h);
  }
  return g;
}

inline double relative_error(double analytic, double numeric,
                             double floor = 1e-8) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline double max_relative_error(std::span<const double> analytic,
                                 std::span<const double> numeric,
                                 double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, relative_error(analytic[i], numeric[i], floor));
  }
  return worst;
}

template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  double worst = 0.0;
  auto ia = std::begin(a);
  auto ib = std::begin(b);
  for (; ia != std::end(a) && ib != std::end(b); ++ia, ++ib) {
    worst = std::max(worst, std::abs(static_cast<double>(*ia) -
                                     static_cast<double>(*ib)));
  }
  return worst;
}

// AUC by comparing every positive with every negative; ties count one half.
inline double pair_count_auc(std::span<const double> pred,
                             std::span<const std::uint8_t> labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (pred[i] > pred[j]) wins += 1.0;
      else if (pred[i] == pred[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline double reference_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline std::vector<double> uniform_values(std::mt19937_64& rng, std::size_t n,
                                          double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = dist(rng);
  return out;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("stec-test-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace stec::testing

#endif  // STEC_TESTS_SUPPORT_ORACLES_HPP_
