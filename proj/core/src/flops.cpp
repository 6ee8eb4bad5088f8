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

#include "stec/flops.hpp"

namespace stec {

std::uint64_t FlopEstimate::total() const {
  std::uint64_t total = 0;
  for (const auto& term : terms) total += term.count;
  return total;
}

std::uint64_t FlopEstimate::sum(const std::string& prefix) const {
  std::uint64_t total = 0;
  for (const auto& term : terms) {
    if (term.name.rfind(prefix, 0) == 0) total += term.count;
  }
  return total;
}

namespace {

void mlp_terms(FlopEstimate& est, std::uint64_t in,
               const std::vector<std::size_t>& hidden,
               const std::string& prefix) {
  std::size_t layer = 0;
  for (std::size_t width : hidden) {
    est.terms.push_back({prefix + std::to_string(layer),
                         std::to_string(in) + "*" + std::to_string(width),
                         in * width});
    in = width;
    ++layer;
  }
  est.terms.push_back(
      {prefix + std::to_string(layer), std::to_string(in) + "*1", in});
}

}  // namespace

FlopEstimate estimate_flops(const ModelConfig& config, std::size_t fields) {
  config.validate();
  const std::uint64_t f = fields, d = config.dim, dh = config.dim / config.heads;
  const std::uint64_t dff = config.effective_ffn_dim();
  const VariantTraits wiring = traits(config.variant);
  const std::uint64_t pairs = f * f * d;
  FlopEstimate est;
  for (std::size_t b = 0; b < config.blocks; ++b) {
    const std::string p = "block" + std::to_string(b) + ".";
    est.terms.push_back({p + "projections", "3*f*d^2", 3 * f * d * d});
    est.terms.push_back({p + "bilinear_logits", "f^2*d", pairs});
    est.terms.push_back({p + "weighted_sum", "f^2*d", pairs});
    if (wiring.explicit_bilinear) {
      est.terms.push_back({p + "explicit_bilinear", "f*d*dh + f^2*d",
                           f * d * dh + pairs});
    }
    if (wiring.use_ffn) {
      est.terms.push_back({p + "ffn", "2*f*d*d_ff", 2 * f * d * dff});
    }
  }
  if (wiring.explicit_bilinear) {
    est.terms.push_back({"final.bilinear", "f*d*dh + f^2*d", f * d * dh + pairs});
  } else {
    est.terms.push_back({"final.bilinear", "2*f*d^2 + f^2*d",
                         2 * f * d * d + pairs});
  }
  std::uint64_t levels = config.blocks + 1;
  if (wiring.fusion == Fusion::kLastOnly) levels = 1;
  for (std::uint64_t l = 0; l < levels; ++l) {
    est.terms.push_back({"fusion.bn" + std::to_string(l), "f^2*d", pairs});
  }
  if (wiring.fusion == Fusion::kAdd && levels > 1) {
    est.terms.push_back({"fusion.add", "(levels-1)*f^2*d", (levels - 1) * pairs});
  }
  const std::uint64_t width =
      wiring.fusion == Fusion::kConcat ? levels * pairs : pairs;
  mlp_terms(est, width, config.mlp_hidden, "fusion.mlp");
  return est;
}

AutoIntConfig AutoIntConfig::matching(const ModelConfig& config) {
  AutoIntConfig out;
  out.layers = config.blocks;
  out.dim = config.dim;
  out.heads = config.heads;
  out.head_dim = config.dim;
  return out;
}

FlopEstimate estimate_autoint_flops(const AutoIntConfig& config,
                                    std::size_t fields) {
  const std::uint64_t f = fields, h = config.heads, a = config.head_dim;
  FlopEstimate est;
  std::uint64_t in = config.dim;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const std::uint64_t out = h * a;
    est.terms.push_back({p + "projections", "3*f*w_in*H*a", 3 * f * in * out});
    est.terms.push_back({p + "residual", "f*w_in*H*a", f * in * out});
    est.terms.push_back({p + "logits", "H*f^2*a", h * f * f * a});
    est.terms.push_back({p + "weighted_sum", "H*f^2*a", h * f * f * a});
    in = out;
  }
  est.terms.push_back({"output", "f*H*a", f * in});
  if (!config.dnn_hidden.empty()) {
    mlp_terms(est, f * config.dim, config.dnn_hidden, "dnn");
  }
  return est;
}

}  // namespace stec
