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

#include "stec/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "stec/model.hpp"
#include "stec/training.hpp"

namespace stec {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct RandomBlockCase {
  std::size_t batch, fields, dim, heads;
  Tensor<double> x;
  StecBlockParams<double> params;
  std::vector<double> w_query, w_key;  // oracle copies

  std::string describe() const {
    std::ostringstream out;
    out << "B=" << batch << " f=" << fields << " d=" << dim << " H=" << heads;
    return out.str();
  }
};

RandomBlockCase random_block_case(std::mt19937_64& rng, bool inject_fault) {
  static constexpr std::size_t kDims[] = {8, 16, 32};
  static constexpr std::size_t kHeads[] = {1, 2, 4};
  RandomBlockCase c;
  c.fields = 2 + rng() % 19;
  c.dim = kDims[rng() % 3];
  c.heads = kHeads[rng() % 3];
  c.batch = 1 + rng() % 3;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> x(c.batch * c.fields * c.dim);
  for (double& v : x) v = unit(rng);
  c.x = Tensor<double>::from_data({c.batch, c.fields, c.dim}, std::move(x));
  BlockOptions options;
  c.params = StecBlockParams<double>::init(c.dim, c.heads, 4 * c.dim, options, rng);
  c.w_query.assign(c.params.w_query.data().begin(), c.params.w_query.data().end());
  c.w_key.assign(c.params.w_key.data().begin(), c.params.w_key.data().end());
  if (inject_fault) c.params.w_key.mutable_data()[0] += 1e-3;
  return c;
}

// Per-head projection x W[:, h*dh : (h+1)*dh] by plain loops.
std::vector<double> project_oracle(const RandomBlockCase& c,
                                   const std::vector<double>& w) {
  const auto x = c.x.data();
  std::vector<double> out(c.batch * c.fields * c.dim, 0.0);
  for (std::size_t b = 0; b < c.batch; ++b) {
    for (std::size_t i = 0; i < c.fields; ++i) {
      for (std::size_t o = 0; o < c.dim; ++o) {
        double acc = 0.0;
        for (std::size_t k = 0; k < c.dim; ++k) {
          acc += x[(b * c.fields + i) * c.dim + k] * w[k * c.dim + o];
        }
        out[(b * c.fields + i) * c.dim + o] = acc;
      }
    }
  }
  return out;
}

}  // namespace

PropertyResult check_bilinear_equivalence(const VerifyOptions& options) {
  const auto start = Clock::now();
  PropertyResult result;
  result.name = "bilinear_sum_equals_attention_logit";
  result.tolerance = 1e-10;
  std::mt19937_64 rng(options.seed);
  std::string worst;
  std::string first_failure;
  for (std::size_t n = 0; n < options.equivalence_cases; ++n) {
    RandomBlockCase c = random_block_case(rng, options.inject_fault);
    const Projections<double> proj = project(c.x, c.params);
    const Tensor<double> pairs = bilinear_pairs(proj.query, proj.key);
    const std::vector<double> q = project_oracle(c, c.w_query);
    const std::vector<double> k = project_oracle(c, c.w_key);
    const std::size_t f = c.fields, d = c.dim, h_count = c.heads;
    const std::size_t dh = d / h_count;
    const auto p = pairs.data();
    double case_error = 0.0;
    for (std::size_t b = 0; b < c.batch; ++b) {
      for (std::size_t i = 0; i < f; ++i) {
        for (std::size_t j = 0; j < f; ++j) {
          for (std::size_t h = 0; h < h_count; ++h) {
            double logit = 0.0, summed = 0.0;
            for (std::size_t e = 0; e < dh; ++e) {
              logit += k[(b * f + i) * d + h * dh + e] *
                       q[(b * f + j) * d + h * dh + e];
              summed += p[(((b * f + i) * f + j) * h_count + h) * dh + e];
            }
            case_error = std::max(case_error, std::abs(logit - summed));
          }
        }
      }
    }
    if (case_error >= result.max_error) {
      result.max_error = case_error;
      worst = c.describe();
    }
    if (case_error >= result.tolerance && first_failure.empty()) {
      std::ostringstream out;
      out << c.describe() << " max_abs_error=" << case_error;
      first_failure = out.str();
    }
    ++result.cases;
  }
  result.passed = first_failure.empty();
  result.detail = result.passed ? "worst " + worst : "failed at " + first_failure;
  result.seconds = elapsed(start);
  return result;
}

PropertyResult check_logit_routes(const VerifyOptions& options) {
  const auto start = Clock::now();
  PropertyResult result;
  result.name = "bilinear_route_equals_matmul_route";
  result.tolerance = 1e-10;
  std::mt19937_64 rng(options.seed + 7);
  for (std::size_t n = 0; n < options.equivalence_cases; ++n) {
    RandomBlockCase c = random_block_case(rng, false);
    const Projections<double> proj = project(c.x, c.params);
    const AttentionResult<double> via_pairs =
        attention(proj.query, proj.key, proj.value);
    const Tensor<double> direct = attention_logits_direct(proj.query, proj.key);
    const auto a = via_pairs.logits.data();
    const auto b = direct.data();
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
    if (err > result.max_error) {
      result.max_error = err;
      result.detail = "worst " + c.describe();
    }
    ++result.cases;
  }
  result.passed = result.max_error < result.tolerance;
  result.seconds = elapsed(start);
  return result;
}

GradientCheck gradient_check(const std::function<Tensor<double>()>& loss,
                             const NamedTensors<double>& params, double step,
                             double floor) {
  for (auto [name, tensor] : params) tensor.zero_grad();
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& [name, tensor] : params) {
    auto g = tensor.grad();
    std::vector<double> copy(tensor.size(), 0.0);
    std::copy(g.begin(), g.end(), copy.begin());
    analytic.push_back(std::move(copy));
  }
  GradientCheck out;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor<double> tensor = params[p].second;
    auto values = tensor.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double plus = loss().item();
      values[i] = saved - step;
      const double minus = loss().item();
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = analytic[p][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      const double abs_error = std::abs(a - numeric);
      const double rel = abs_error / denom;
      out.max_abs_error = std::max(out.max_abs_error, abs_error);
      if (out.worst.empty() || rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = params[p].first + "[" + std::to_string(i) + "]";
      }
      ++out.entries;
    }
  }
  return out;
}

PropertyResult check_model_gradients(std::uint64_t seed) {
  const auto start = Clock::now();
  PropertyResult result;
  result.name = "model_gradients_match_finite_differences";
  result.tolerance = 1e-4;
  FeatureSchema schema({{"f0", FieldKind::kCategorical},
                        {"f1", FieldKind::kCategorical},
                        {"f2", FieldKind::kCategorical}});
  std::vector<RawRecord> rows;
  for (int v = 0; v < 3; ++v) {
    const std::string s = "v" + std::to_string(v);
    rows.push_back({{s, s, s}, {}, v % 2});
  }
  const Vocabulary vocab = build_vocab(rows, schema, 1);
  ModelConfig config;
  config.blocks = 2;
  config.dim = 4;
  config.heads = 2;
  config.seed = seed;
  StecModel<double> model(config, schema, vocab);
  Batch batch;
  batch.size = 4;
  batch.categorical = {0, 1, 2, 1, 0, 2, 2, 2, 1, 0, 0, 3};
  batch.labels = {1, 0, 1, 0};
  auto loss = [&]() {
    const ForwardResult<double> out = model.forward(batch, ops::NormMode::kTrain);
    return bce_loss<double>(out.prob, batch.labels);
  };
  const GradientCheck check = gradient_check(loss, model.parameters());
  result.max_error = check.max_rel_error;
  result.cases = check.entries;
  std::ostringstream detail;
  detail << "worst " << check.worst << " max_abs_error=" << check.max_abs_error;
  result.detail = detail.str();
  result.passed = check.max_rel_error < result.tolerance;
  result.seconds = elapsed(start);
  return result;
}

PropertyResult check_auc_oracle(std::uint64_t seed) {
  const auto start = Clock::now();
  PropertyResult result;
  result.name = "auc_matches_pair_counting";
  result.tolerance = 0.0;
  std::mt19937_64 rng(seed + 11);
  bool exact = true;
  for (std::size_t n = 0; n < 50; ++n) {
    const std::size_t size = 2 + rng() % 29;
    std::vector<double> pred(size);
    std::vector<std::uint8_t> labels(size);
    for (std::size_t i = 0; i < size; ++i) {
      pred[i] = static_cast<double>(rng() % 5) / 4.0;  // coarse grid forces ties
      labels[i] = static_cast<std::uint8_t>(rng() % 2);
    }
    labels[0] = 0;
    labels[1] = 1;
    std::uint64_t twice_wins = 0, positives = 0, negatives = 0;
    for (std::size_t i = 0; i < size; ++i) {
      positives += labels[i];
      negatives += 1 - labels[i];
      if (!labels[i]) continue;
      for (std::size_t j = 0; j < size; ++j) {
        if (labels[j]) continue;
        twice_wins += pred[i] > pred[j] ? 2 : pred[i] == pred[j] ? 1 : 0;
      }
    }
    const double brute = static_cast<double>(twice_wins) /
                         static_cast<double>(2 * positives * negatives);
    const double ranked = auc(pred, labels);
    result.max_error = std::max(result.max_error, std::abs(ranked - brute));
    if (ranked != brute && exact) {
      exact = false;
      result.detail = "instance " + std::to_string(n) + " differs";
    }
    ++result.cases;
  }
  result.passed = exact;
  if (exact) result.detail = "all instances identical";
  result.seconds = elapsed(start);
  return result;
}

PropertyResult check_bce_values() {
  const auto start = Clock::now();
  PropertyResult result;
  result.name = "bce_matches_hand_values";
  result.tolerance = 1e-9;
  struct Case {
    std::vector<double> pred;
    std::vector<double> labels;
    double expected;
  };
  // ln 2, and (-ln 0.9 - ln 0.8) / 2, written out by hand.
  const std::vector<Case> cases = {
      {{0.5}, {1.0}, 0.6931471805599453},
      {{0.9, 0.2}, {1.0, 0.0}, 0.1642520334860182},
      {{0.5, 0.5}, {0.0, 1.0}, 0.6931471805599453},
  };
  for (const auto& c : cases) {
    const auto pred = Tensor<double>::from_data({c.pred.size()}, c.pred);
    const double value = bce_loss<double>(pred, std::span<const double>(c.labels)).item();
    result.max_error = std::max(result.max_error, std::abs(value - c.expected));
    ++result.cases;
  }
  result.passed = result.max_error < result.tolerance;
  result.detail = std::to_string(result.cases) + " cases";
  result.seconds = elapsed(start);
  return result;
}

std::vector<PropertyResult> run_verify(const VerifyOptions& options) {
  return {check_bilinear_equivalence(options), check_logit_routes(options),
          check_model_gradients(options.seed), check_auc_oracle(options.seed),
          check_bce_values()};
}

}  // namespace stec
