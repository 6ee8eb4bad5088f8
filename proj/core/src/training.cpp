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

#include "stec/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace stec {

template <typename T>
Tensor<T> bce_loss(const Tensor<T>& pred, std::span<const T> labels,
                   double eps) {
  if (pred.rank() != 1) {
    throw DimensionError("bce_loss: predictions must be rank 1, got " +
                         to_string(pred.shape()));
  }
  if (pred.size() != labels.size()) {
    throw DimensionError("bce_loss: " + std::to_string(pred.size()) +
                         " predictions vs " + std::to_string(labels.size()) +
                         " labels");
  }
  std::vector<T> y(labels.begin(), labels.end());
  for (T label : y) {
    if (label != T(0) && label != T(1)) {
      throw ValueError("bce_loss: labels must be 0 or 1");
    }
  }
  const T lo = static_cast<T>(eps);
  const T hi = T(1) - static_cast<T>(eps);
  const auto p = pred.data();
  const std::size_t n = p.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = std::clamp(p[i], lo, hi);
    total -= y[i] == T(1) ? std::log(q) : std::log(1.0 - q);
  }
  const T value = static_cast<T>(total / static_cast<double>(n));
  return Tensor<T>::from_op(
      "bce_loss", {1}, {value}, {pred},
      [y = std::move(y), lo, hi](Node<T>& self) {
        auto g = grad_sink(*self.parents[0]);
        const auto& pv = self.parents[0]->value;
        const T scale = self.grad[0] / static_cast<T>(pv.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
          const T q = pv[i];
          if (q < lo || q > hi) continue;  // flat region of the clamp
          g[i] += scale * (y[i] == T(1) ? -T(1) / q : T(1) / (T(1) - q));
        }
      });
}

template <typename T>
Tensor<T> bce_loss(const Tensor<T>& pred, std::span<const std::uint8_t> labels,
                   double eps) {
  std::vector<T> y(labels.begin(), labels.end());
  return bce_loss<T>(pred, std::span<const T>(y), eps);
}

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads,
               AdamMoments<T>& state, std::uint64_t t, const AdamHyper& hyper) {
  if (t == 0) throw ValueError("adam_step: step counter starts at 1");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), T(0));
    state.v.assign(params.size(), T(0));
  }
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw DimensionError("adam_step: parameter, gradient and moment sizes differ (" +
                         std::to_string(params.size()) + ", " +
                         std::to_string(grads.size()) + ", " +
                         std::to_string(state.m.size()) + ")");
  }
  const T b1 = static_cast<T>(hyper.beta1);
  const T b2 = static_cast<T>(hyper.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(hyper.beta1, static_cast<double>(t)));
  const T c2 = static_cast<T>(1.0 - std::pow(hyper.beta2, static_cast<double>(t)));
  const T lr = static_cast<T>(hyper.lr);
  const T eps = static_cast<T>(hyper.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
    const T m_hat = state.m[i] / c1;
    const T v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

template <typename T>
Adam<T>::Adam(NamedTensors<T> params, AdamHyper hyper)
    : params_(std::move(params)), hyper_(hyper), moments_(params_.size()) {
  if (!(hyper_.lr > 0.0)) throw ConfigError("learning rate must be positive");
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& [name, tensor] : params_) tensor.zero_grad();
}

template <typename T>
void Adam<T>::step() {
  ++t_;
  std::vector<T> zeros;
  for (std::size_t p = 0; p < params_.size(); ++p) {
    Tensor<T>& tensor = params_[p].second;
    std::span<const T> grad = tensor.grad();
    if (grad.size() != tensor.size()) {
      zeros.assign(tensor.size(), T(0));
      grad = zeros;
    }
    adam_step<T>(tensor.mutable_data(), grad, moments_[p], t_, hyper_);
  }
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(lr_decay > 0.0 && lr_decay < 1.0)) {
    throw ConfigError("lr_decay must lie in (0, 1)");
  }
  if (batch_size < 1 || eval_batch_size < 1) {
    throw ConfigError("batch sizes must be at least 1");
  }
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (early_stop_rounds < 1) throw ConfigError("early_stop_rounds must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (!(min_delta >= 0.0)) throw ConfigError("min_delta must be non-negative");
}

template <typename T>
std::vector<double> predict_all(CtrModel<T>& model, const EncodedSet& set,
                                std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(set.size());
  BatchStream stream(set, batch_size);
  Batch batch;
  while (stream.next(batch)) {
    const Tensor<T> prob = model.predict(batch, ops::NormMode::kInference);
    for (T p : prob.data()) out.push_back(static_cast<double>(p));
  }
  return out;
}

template <typename T>
Evaluation evaluate(CtrModel<T>& model, const EncodedSet& set,
                    std::size_t batch_size) {
  const std::vector<double> pred = predict_all(model, set, batch_size);
  Evaluation eval;
  eval.instances = set.size();
  eval.logloss = logloss(pred, set.labels);
  try {
    eval.auc = auc(pred, set.labels);
  } catch (const MetricError&) {
    eval.auc.reset();
  }
  return eval;
}

namespace {

template <typename T>
struct Snapshot {
  std::vector<std::vector<T>> values;
  std::vector<ops::BatchNormStats<T>> stats;

  void capture(CtrModel<T>& model) {
    values.clear();
    for (const auto& [name, tensor] : model.parameters()) {
      values.emplace_back(tensor.data().begin(), tensor.data().end());
    }
    stats.clear();
    for (const auto* s : model.norm_stats()) stats.push_back(*s);
  }

  void restore(CtrModel<T>& model) const {
    auto params = model.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
      std::copy(values[p].begin(), values[p].end(),
                params[p].second.mutable_data().begin());
    }
    auto live = model.norm_stats();
    for (std::size_t s = 0; s < live.size(); ++s) *live[s] = stats[s];
  }
};

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  // splitmix64 finalizer: decorrelates consecutive epochs.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (epoch + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

template <typename T>
MetricsReport fit(CtrModel<T>& model, const EncodedSet& train,
                  const EncodedSet& valid, const TrainConfig& config,
                  std::ostream* log) {
  config.validate();
  if (train.size() < 2) throw ValueError("fit: need at least 2 training records");
  if (valid.size() == 0) throw ValueError("fit: validation set is empty");
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  Adam<T> optimizer(model.parameters(), AdamHyper{config.lr});
  MetricsReport report;
  Snapshot<T> best;
  best.capture(model);
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t streak = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    EpochRecord record;
    record.epoch = epoch;
    record.lr = optimizer.lr();
    BatchStream stream(train, config.batch_size, epoch_seed(config.seed, epoch));
    double loss_total = 0.0;
    std::size_t loss_count = 0;
    Batch batch;
    while (stream.next(batch)) {
      if (batch.size < 2) continue;
      double value = 0.0;
      try {
        optimizer.zero_grad();
        const Tensor<T> prob = model.predict(batch, ops::NormMode::kTrain);
        const Tensor<T> loss = bce_loss<T>(prob, batch.labels);
        value = static_cast<double>(loss.item());
        if (!std::isfinite(value)) throw NonFiniteError("loss is not finite");
        loss.backward();
        optimizer.step();
      } catch (const NonFiniteError& e) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(optimizer.steps() + 1) +
                              " (lr " + std::to_string(optimizer.lr()) +
                              "): " + e.what());
      }
      loss_total += value * static_cast<double>(batch.size);
      loss_count += batch.size;
    }
    record.train_loss = loss_count ? loss_total / static_cast<double>(loss_count) : 0.0;

    const Evaluation eval = evaluate(model, valid, config.eval_batch_size);
    record.valid_logloss = eval.logloss;
    record.valid_auc = eval.auc;
    bool stop = false;
    if (eval.logloss < best_loss - config.min_delta) {
      best_loss = eval.logloss;
      record.improved = true;
      report.best_epoch = epoch;
      report.best_valid_logloss = eval.logloss;
      report.best_valid_auc = eval.auc;
      best.capture(model);
      streak = 0;
    } else {
      ++streak;
      if (streak >= config.early_stop_rounds) {
        stop = true;
      } else if (streak % config.patience == 0) {
        optimizer.set_lr(optimizer.lr() * config.lr_decay);
        record.lr_decayed = true;
        ++report.lr_decays;
      }
    }
    record.seconds =
        std::chrono::duration<double>(Clock::now() - epoch_start).count();
    if (log) {
      *log << "epoch " << epoch << " lr=" << record.lr
           << " train_loss=" << record.train_loss
           << " valid_logloss=" << record.valid_logloss;
      if (record.valid_auc) *log << " valid_auc=" << *record.valid_auc;
      if (record.improved) *log << " (best)";
      if (record.lr_decayed) *log << " (lr decay)";
      *log << '\n';
    }
    report.epochs.push_back(record);
    if (stop) {
      report.early_stopped = true;
      break;
    }
  }
  best.restore(model);
  report.steps = optimizer.steps();
  report.wall_clock_seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

#define STEC_INSTANTIATE_TRAINING(T)                                           \
  template Tensor<T> bce_loss(const Tensor<T>&, std::span<const T>, double);   \
  template Tensor<T> bce_loss(const Tensor<T>&, std::span<const std::uint8_t>, \
                              double);                                         \
  template void adam_step(std::span<T>, std::span<const T>, AdamMoments<T>&,   \
                          std::uint64_t, const AdamHyper&);                    \
  template class Adam<T>;                                                      \
  template std::vector<double> predict_all(CtrModel<T>&, const EncodedSet&,    \
                                           std::size_t);                       \
  template Evaluation evaluate(CtrModel<T>&, const EncodedSet&, std::size_t);  \
  template MetricsReport fit(CtrModel<T>&, const EncodedSet&,                  \
                             const EncodedSet&, const TrainConfig&,            \
                             std::ostream*);

STEC_INSTANTIATE_TRAINING(float)
STEC_INSTANTIATE_TRAINING(double)

}  // namespace stec
