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

#ifndef STEC_TRAINING_HPP_
#define STEC_TRAINING_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stec/data.hpp"
#include "stec/model.hpp"

namespace stec {

inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy of probabilities `pred[B]` against 0/1 labels.
// Predictions are clamped to [eps, 1 - eps]; clamped entries get no
// gradient. Throws ValueError for a label outside {0, 1}.
template <typename T>
Tensor<T> bce_loss(const Tensor<T>& pred, std::span<const T> labels,
                   double eps = kProbClamp);
template <typename T>
Tensor<T> bce_loss(const Tensor<T>& pred, std::span<const std::uint8_t> labels,
                   double eps = kProbClamp);

// Same quantity on plain values.
double logloss(std::span<const double> pred, std::span<const std::uint8_t> labels,
               double eps = kProbClamp);

// Rank-based (Mann-Whitney) AUC with average ranks for ties. Throws
// MetricError unless both classes are present.
double auc(std::span<const double> pred, std::span<const std::uint8_t> labels);

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamMoments {
  std::vector<T> m;
  std::vector<T> v;
};

// One bias-corrected Adam update at step t >= 1. Empty moments are
// allocated as zeros; a size mismatch throws DimensionError.
template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads,
               AdamMoments<T>& state, std::uint64_t t, const AdamHyper& hyper);

// Adam over a fixed parameter list. A parameter whose gradient was never
// populated is updated as if its gradient were zero.
template <typename T>
class Adam {
 public:
  Adam(NamedTensors<T> params, AdamHyper hyper);

  void zero_grad();
  void step();
  double lr() const { return hyper_.lr; }
  void set_lr(double lr) { hyper_.lr = lr; }
  std::uint64_t steps() const { return t_; }

 private:
  NamedTensors<T> params_;
  AdamHyper hyper_;
  std::vector<AdamMoments<T>> moments_;
  std::uint64_t t_ = 0;
};

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 1024;
  double lr_decay = 0.1;
  // Non-improving epochs between learning-rate decays.
  std::size_t patience = 2;
  std::size_t max_epochs = 20;
  // Consecutive non-improving epochs that end training.
  std::size_t early_stop_rounds = 3;
  double min_delta = 1e-6;
  std::uint64_t seed = 0;
  std::size_t eval_batch_size = 4096;

  // Throws ConfigError.
  void validate() const;
};

struct Evaluation {
  double logloss = 0.0;
  std::optional<double> auc;  // empty when the set holds a single class
  std::size_t instances = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;        // rate used during the epoch
  double train_loss = 0.0;
  double valid_logloss = 0.0;
  std::optional<double> valid_auc;
  bool improved = false;
  bool lr_decayed = false;  // decay applied after this epoch
  double seconds = 0.0;     // wall clock, excluded from deterministic output
};

struct MetricsReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_valid_logloss = 0.0;
  std::optional<double> best_valid_auc;
  std::size_t lr_decays = 0;
  bool early_stopped = false;
  std::uint64_t steps = 0;
  double wall_clock_seconds = 0.0;
};

// Inference-mode predictions for every record, in storage order.
template <typename T>
std::vector<double> predict_all(CtrModel<T>& model, const EncodedSet& set,
                                std::size_t batch_size = 4096);

template <typename T>
Evaluation evaluate(CtrModel<T>& model, const EncodedSet& set,
                    std::size_t batch_size = 4096);

// Epoch loop: seeded shuffle, forward, BCE, backward, Adam. Validation
// logloss is checked after every epoch; `patience` non-improving epochs in
// a row decay the learning rate, `early_stop_rounds` stop training, and
// the best epoch's parameters and normalization statistics are restored.
// Training batches of one record are skipped (batch statistics need two).
// Throws DivergenceError when the training loss becomes non-finite.
template <typename T>
MetricsReport fit(CtrModel<T>& model, const EncodedSet& train,
                  const EncodedSet& valid, const TrainConfig& config,
                  std::ostream* log = nullptr);

}  // namespace stec

#endif  // STEC_TRAINING_HPP_
