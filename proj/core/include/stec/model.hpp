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

#ifndef STEC_MODEL_HPP_
#define STEC_MODEL_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "stec/block.hpp"
#include "stec/embedding.hpp"
#include "stec/ops.hpp"

namespace stec {

// Architecture variants. kStec is the full model; the others are the
// ablations that swap the bilinear source, drop the FFNs, or change fusion.
enum class Variant { kStec, kBL, kNF, kLO, kF };

enum class Fusion { kConcat, kLastOnly, kAdd };

struct VariantTraits {
  bool explicit_bilinear;
  bool use_ffn;
  Fusion fusion;
};

VariantTraits traits(Variant variant);
std::string_view variant_name(Variant variant);
// Accepts "STEC", "STEC_BL", "BL", ... (case-insensitive).
Variant parse_variant(std::string_view text);
std::vector<Variant> all_variants();

struct ModelConfig {
  std::size_t blocks = 2;
  std::size_t dim = 16;
  std::size_t heads = 2;
  std::size_t ffn_dim = 0;  // 0 selects 4 * dim
  std::vector<std::size_t> mlp_hidden;  // empty: single linear layer
  double dropout = 0.0;
  Variant variant = Variant::kStec;
  bool residual = false;
  bool layer_norm = false;
  std::uint64_t seed = 0;

  std::size_t effective_ffn_dim() const { return ffn_dim ? ffn_dim : 4 * dim; }
  // Throws ConfigError.
  void validate() const;
};

// Canonical "key=value" lines, stable across runs.
std::string serialize(const ModelConfig& config);
ModelConfig parse_model_config(std::string_view text);
std::uint64_t fnv1a64(std::string_view bytes);

template <typename T>
struct ForwardResult {
  Tensor<T> logit;  // [B]
  Tensor<T> prob;   // [B]
  std::vector<Tensor<T>> bilinear;  // every interaction level, [B, f, f, d]
  std::vector<Tensor<T>> fused;     // normalized levels that reach fusion
  Tensor<T> fusion;                 // MLP input
  std::vector<Tensor<T>> attention_weights;
};

// Interface the training loop needs from any click model.
template <typename T>
class CtrModel {
 public:
  virtual ~CtrModel() = default;
  virtual Tensor<T> predict(const Batch& batch, ops::NormMode mode) = 0;
  virtual NamedTensors<T> parameters() const = 0;
  virtual std::vector<ops::BatchNormStats<T>*> norm_stats() { return {}; }
};

template <typename T>
struct LevelNorm {
  std::size_t level = 0;
  Tensor<T> gamma;
  Tensor<T> beta;
  ops::BatchNormStats<T> stats;
};

template <typename T>
class StecModel : public CtrModel<T> {
 public:
  // Builds and initializes the wiring selected by config.variant.
  StecModel(ModelConfig config, FeatureSchema schema, Vocabulary vocab,
            NumericNormalizer normalizer = {});
  StecModel(StecModel&&) = default;
  StecModel& operator=(StecModel&&) = default;
  // Parameters are shared handles; copies would alias them.
  StecModel(const StecModel&) = delete;
  StecModel& operator=(const StecModel&) = delete;

  ForwardResult<T> forward(const Batch& batch, ops::NormMode mode);
  ForwardResult<T> forward_embedded(const Tensor<T>& x, ops::NormMode mode);

  Tensor<T> predict(const Batch& batch, ops::NormMode mode) override {
    return forward(batch, mode).prob;
  }
  NamedTensors<T> parameters() const override;
  std::vector<ops::BatchNormStats<T>*> norm_stats() override;

  const ModelConfig& config() const { return config_; }
  const FeatureSchema& schema() const { return schema_; }
  const Vocabulary& vocab() const { return vocab_; }
  const NumericNormalizer& normalizer() const { return normalizer_; }
  const EmbeddingTable<T>& embedding() const { return embedding_; }
  const std::vector<StecBlockParams<T>>& blocks() const { return blocks_; }
  const BilinearLayerParams<T>& final_layer() const { return final_; }
  std::vector<LevelNorm<T>>& level_norms() { return norms_; }
  const std::vector<LevelNorm<T>>& level_norms() const { return norms_; }

  // Interaction levels computed per forward: one per block plus the
  // standalone final layer.
  std::size_t interaction_levels() const { return blocks_.size() + 1; }
  std::size_t fused_levels() const { return norms_.size(); }
  std::size_t level_width() const;
  std::size_t fusion_width() const;

 private:
  ModelConfig config_;
  FeatureSchema schema_;
  Vocabulary vocab_;
  NumericNormalizer normalizer_;
  BlockOptions block_options_;
  Fusion fusion_ = Fusion::kConcat;
  std::mt19937_64 rng_;
  EmbeddingTable<T> embedding_;
  std::vector<StecBlockParams<T>> blocks_;
  BilinearLayerParams<T> final_;
  std::vector<LevelNorm<T>> norms_;
  std::vector<Tensor<T>> mlp_weights_;
  std::vector<Tensor<T>> mlp_biases_;
};

template <typename T>
StecModel<T> build_variant(const ModelConfig& config,
                           const FeatureSchema& schema,
                           const Vocabulary& vocab,
                           const NumericNormalizer& normalizer = {});

// Copies values of same-named, same-shaped parameters and BN running
// statistics from `from` into `to`. Returns the number of tensors copied.
template <typename T>
std::size_t copy_parameters(const StecModel<T>& from, StecModel<T>& to);

// Logistic regression on per-field weights: no feature interactions.
template <typename T>
class LinearBaseline : public CtrModel<T> {
 public:
  LinearBaseline(const FeatureSchema& schema, const Vocabulary& vocab,
                 std::uint64_t seed);

  Tensor<T> predict(const Batch& batch, ops::NormMode mode) override;
  NamedTensors<T> parameters() const override;

 private:
  FeatureSchema schema_;
  EmbeddingTable<T> weights_;  // d = 1
  Tensor<T> bias_;
};

extern template class StecModel<float>;
extern template class StecModel<double>;
extern template class LinearBaseline<float>;
extern template class LinearBaseline<double>;

}  // namespace stec

#endif  // STEC_MODEL_HPP_
