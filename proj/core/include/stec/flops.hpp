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

#ifndef STEC_FLOPS_HPP_
#define STEC_FLOPS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "stec/model.hpp"

// Analytic multiply-add counts for one instance's forward pass.
namespace stec {

struct FlopTerm {
  std::string name;
  std::string formula;
  std::uint64_t count = 0;
};

struct FlopEstimate {
  std::vector<FlopTerm> terms;

  std::uint64_t total() const;
  // Sum of the terms whose name starts with `prefix`.
  std::uint64_t sum(const std::string& prefix) const;
};

// Per block: 3fd^2 projections, f^2 d bilinear/logits, f^2 d weighted sum,
// 2 f d d_ff FFN. Final bilinear layer 2fd^2 + f^2 d. Fusion: f^2 d per
// normalized level, plus the MLP.
FlopEstimate estimate_flops(const ModelConfig& config, std::size_t fields);

// Stacked multi-head self-attention with residual projections in the style
// of AutoInt+: every head attends in a full `head_dim` space and the layer
// output width is heads * head_dim. An optional DNN runs on the flattened
// embeddings.
struct AutoIntConfig {
  std::size_t layers = 2;
  std::size_t dim = 16;
  std::size_t heads = 2;
  std::size_t head_dim = 16;
  std::vector<std::size_t> dnn_hidden{400, 400, 400};

  // Same d, N and H as `config`, heads of full width d.
  static AutoIntConfig matching(const ModelConfig& config);
};

FlopEstimate estimate_autoint_flops(const AutoIntConfig& config,
                                    std::size_t fields);

}  // namespace stec

#endif  // STEC_FLOPS_HPP_
