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

#ifndef STEC_VERIFY_HPP_
#define STEC_VERIFY_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stec/block.hpp"

// Self-checks of the implementation against independent references.
namespace stec {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::size_t cases = 0;
  std::string detail;  // worst case, or the first failing configuration
  double seconds = 0.0;
};

struct VerifyOptions {
  std::size_t equivalence_cases = 100;
  std::uint64_t seed = 0;
  // Perturbs the key weights seen by the library path so the equivalence
  // property must fail.
  bool inject_fault = false;
};

// For random (f in [2, 20], d in {8, 16, 32}, H in {1, 2, 4}), compares the
// per-head sum over dh of bilinear_pairs with K_h^T Q_h computed by plain
// loops from the embeddings and a copy of the weights. Tolerance 1e-10.
PropertyResult check_bilinear_equivalence(const VerifyOptions& options);

// Logits from the bilinear route against the batched-matmul route.
PropertyResult check_logit_routes(const VerifyOptions& options);

// Central differences (h = 1e-6) of the BCE loss of a 64-bit model with
// f = 3, d = 4, N = 2, H = 2 on a batch of 4, for every parameter entry.
// Relative error |a - n| / max(|a|, |n|, kGradientFloor) must stay below
// 1e-4.
PropertyResult check_model_gradients(std::uint64_t seed);

// Rank AUC against brute-force pair counting on 50 small tied instances;
// must agree exactly.
PropertyResult check_auc_oracle(std::uint64_t seed);

// BCE against hand-computed values, tolerance 1e-9.
PropertyResult check_bce_values();

std::vector<PropertyResult> run_verify(const VerifyOptions& options);

// Denominator floor of the gradient relative error. A 64-bit central
// difference at h = 1e-6 carries about 1e-10 of absolute round-off (a few
// ulp of an O(1) loss over 2h), so entries smaller than this are held to an
// absolute error of 1e-4 * kGradientFloor = 1e-9 instead.
inline constexpr double kGradientFloor = 1e-5;

// Largest relative error between analytic and central-difference gradients
// of `loss` over every entry of `params`. `loss` must rebuild its graph on
// each call.
struct GradientCheck {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst;  // "name[index]" of the largest relative error
  std::size_t entries = 0;
};
GradientCheck gradient_check(const std::function<Tensor<double>()>& loss,
                             const NamedTensors<double>& params,
                             double step = 1e-6,
                             double floor = kGradientFloor);

}  // namespace stec

#endif  // STEC_VERIFY_HPP_
