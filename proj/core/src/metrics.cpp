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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stec/training.hpp"

namespace stec {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": " + std::to_string(a) +
                         " predictions vs " + std::to_string(b) + " labels");
  }
}

void require_binary(std::span<const std::uint8_t> labels) {
  for (std::uint8_t y : labels) {
    if (y > 1) throw ValueError("labels must be 0 or 1");
  }
}

}  // namespace

double logloss(std::span<const double> pred, std::span<const std::uint8_t> labels,
               double eps) {
  require_same_length(pred.size(), labels.size(), "logloss");
  require_binary(labels);
  if (pred.empty()) throw MetricError("logloss of an empty set is undefined");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = std::clamp(pred[i], eps, 1.0 - eps);
    total -= labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return total / static_cast<double>(pred.size());
}

double auc(std::span<const double> pred, std::span<const std::uint8_t> labels) {
  require_same_length(pred.size(), labels.size(), "auc");
  require_binary(labels);
  const std::size_t n = pred.size();
  for (double p : pred) {
    if (!std::isfinite(p)) throw NonFiniteError("auc: non-finite prediction");
  }
  std::uint64_t positives = 0;
  for (std::uint8_t y : labels) positives += y;
  const std::uint64_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw MetricError("AUC is undefined unless both classes are present");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pred[a] < pred[b]; });
  // Twice the rank sum of the positives, with ties sharing the average of
  // their 1-based ranks; doubling keeps every quantity an exact integer.
  std::uint64_t rank_sum_x2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pred[order[j]] == pred[order[i]]) ++j;
    std::uint64_t group_positives = 0;
    for (std::size_t k = i; k < j; ++k) group_positives += labels[order[k]];
    rank_sum_x2 += group_positives * static_cast<std::uint64_t>(i + 1 + j);
    i = j;
  }
  // 2U = 2R - P(P+1) counts a won pair as 2 and a tie as 1.
  const std::uint64_t u_x2 = rank_sum_x2 - positives * (positives + 1);
  return static_cast<double>(u_x2) /
         static_cast<double>(2 * positives * negatives);
}

}  // namespace stec
