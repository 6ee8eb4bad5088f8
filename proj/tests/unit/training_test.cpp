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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "stec/data.hpp"
#include "stec/model.hpp"
#include "stec/training.hpp"

namespace stec {
namespace {

using T64 = Tensor<double>;

TEST(BceLoss, HalfProbabilityOnPositiveIsLnTwo) {
  const std::vector<double> y = {1.0};
  const T64 loss = bce_loss<double>(T64::from_data({1}, {0.5}), std::span<const double>(y));
  EXPECT_NEAR(loss.item(), 0.6931471805599453, 1e-12);
}

TEST(BceLoss, ExactPredictionIsBoundedByClamp) {
  const std::vector<std::uint8_t> y = {1, 0};
  T64 pred = T64::from_data({2}, {1.0, 0.0}, true);
  const T64 loss = bce_loss<double>(pred, y);
  EXPECT_LE(loss.item(), -std::log(1.0 - 1e-7) + 1e-15);
  EXPECT_GT(loss.item(), 0.0);
  loss.backward();
  EXPECT_EQ(pred.grad()[0], 0.0);
  EXPECT_EQ(pred.grad()[1], 0.0);
}

TEST(BceLoss, TwoInstanceHandValue) {
  const std::vector<std::uint8_t> y = {1, 0};
  const T64 loss = bce_loss<double>(T64::from_data({2}, {0.9, 0.2}), y);
  const double expected = (-std::log(0.9) - std::log(0.8)) / 2.0;
  EXPECT_NEAR(loss.item(), expected, 1e-12);
  EXPECT_NEAR(loss.item(), 0.164252, 1e-6);
  const std::vector<double> plain = {0.9, 0.2};
  EXPECT_NEAR(logloss(plain, y), expected, 1e-15);
}

TEST(BceLoss, RejectsNonBinaryLabels) {
  const std::vector<double> y = {0.5};
  EXPECT_THROW(bce_loss<double>(T64::from_data({1}, {0.3}), std::span<const double>(y)), ValueError);
  const std::vector<std::uint8_t> y8 = {2};
  EXPECT_THROW(bce_loss<double>(T64::from_data({1}, {0.3}), y8), ValueError);
}

TEST(BceLoss, GradientWrtLogitIsResidualOverBatch) {
  std::mt19937_64 rng(1);
  const std::size_t b = 7;
  T64 logits = T64::from_data({b}, testing::uniform_values(rng, b, -4, 4), true);
  std::vector<std::uint8_t> y(b);
  for (auto& v : y) v = static_cast<std::uint8_t>(rng() % 2);
  bce_loss<double>(ops::sigmoid(logits), y).backward();
  for (std::size_t i = 0; i < b; ++i) {
    const double p = testing::reference_sigmoid(logits.data()[i]);
    EXPECT_NEAR(logits.grad()[i], (p - y[i]) / static_cast<double>(b), 1e-10);
  }
}

TEST(Auc, HandExamples) {
  const std::vector<std::uint8_t> two = {0, 1};
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.9}, two), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.1}, two), 0.0);
  EXPECT_EQ(auc(std::vector<double>{0.4, 0.4, 0.4}, std::vector<std::uint8_t>{0, 1, 1}), 0.5);
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<std::uint8_t>{0, 0, 1, 1}), 0.75);
}

TEST(Auc, SingleClassAndNonFiniteInputsAreErrors) {
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<std::uint8_t>{1, 1}), MetricError);
  EXPECT_THROW(auc(std::vector<double>{0.1, NAN}, std::vector<std::uint8_t>{0, 1}), NonFiniteError);
}

TEST(Auc, MatchesPairCountingWithTies) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<double> pred(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<double>(rng() % 6) / 5.0;
      y[i] = static_cast<std::uint8_t>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_DOUBLE_EQ(auc(pred, y), testing::pair_count_auc(pred, y));
  }
}

TEST(Auc, InvariantUnderStrictlyMonotoneTransforms) {
  std::mt19937_64 rng(5);
  std::vector<double> pred = testing::uniform_values(rng, 300, 0.0, 1.0);
  for (std::size_t i = 0; i < 50; ++i) pred[i] = pred[i + 50];  // ties survive transforms
  std::vector<std::uint8_t> y(pred.size());
  for (auto& v : y) v = static_cast<std::uint8_t>(rng() % 2);
  const double base = auc(pred, y);
  std::vector<double> a, b, c;
  for (double p : pred) {
    a.push_back(std::exp(3 * p));
    b.push_back(p * p * p - 7);
    c.push_back(std::log(p / (1 - p)));
  }
  EXPECT_EQ(auc(a, y), base);
  EXPECT_EQ(auc(b, y), base);
  EXPECT_EQ(auc(c, y), base);
}

TEST(AdamStep, ZeroGradientLeavesParametersAndDecaysMoments) {
  std::vector<double> w = {1.0, -2.0};
  AdamMoments<double> state;
  const AdamHyper hyper;
  adam_step<double>(w, std::vector<double>{0.5, -0.5}, state, 1, hyper);
  const std::vector<double> after_first = w;
  const auto m1 = state.m, v1 = state.v;
  adam_step<double>(w, std::vector<double>{0.0, 0.0}, state, 2, hyper);
  EXPECT_NE(w, after_first) << "first-moment momentum still moves w";
  std::vector<double> frozen = {3.0};
  AdamMoments<double> fresh;
  adam_step<double>(frozen, std::vector<double>{0.0}, fresh, 1, hyper);
  EXPECT_EQ(frozen[0], 3.0);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(state.m[i], 0.9 * m1[i]);
    EXPECT_DOUBLE_EQ(state.v[i], 0.999 * v1[i]);
  }
}

TEST(AdamStep, FirstStepMovesByLearningRateAgainstGradientSign) {
  for (double g : {1e-3, 0.5, -20.0}) {
    std::vector<double> w = {0.0};
    AdamMoments<double> state;
    adam_step<double>(w, std::vector<double>{g}, state, 1, {});
    EXPECT_NEAR(w[0], g > 0 ? -1e-3 : 1e-3, 1e-8);
  }
}

TEST(AdamStep, TwoStepsOnSquareMatchHandRecurrence) {
  // f(w) = w^2, w0 = 1, lr = 0.1; the oracle spells out the recurrence.
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double w = 1.0, m = 0.0, v = 0.0;
  std::vector<double> expected;
  for (int t = 1; t <= 2; ++t) {
    const double g = 2 * w;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    w -= lr * mhat / (std::sqrt(vhat) + eps);
    expected.push_back(w);
  }
  std::vector<double> param = {1.0};
  AdamMoments<double> state;
  AdamHyper hyper;
  hyper.lr = lr;
  for (int t = 1; t <= 2; ++t) {
    adam_step<double>(param, std::vector<double>{2 * param[0]}, state, t, hyper);
    EXPECT_NEAR(param[0], expected[t - 1], 1e-12) << "step " << t;
  }
}

TEST(AdamStep, OneStepDecreasesConvexQuadratic) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto w = testing::uniform_values(rng, 5, -3, 3);
    auto loss = [](const std::vector<double>& x) {
      double s = 0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (i + 1.0) * x[i] * x[i];
      return s;
    };
    std::vector<double> g(5);
    for (std::size_t i = 0; i < 5; ++i) g[i] = 2 * (i + 1.0) * w[i];
    const double before = loss(w);
    AdamMoments<double> state;
    adam_step<double>(w, g, state, 1, {});
    EXPECT_LT(loss(w), before);
  }
}

TEST(AdamStep, MismatchedStateIsAnError) {
  std::vector<double> w = {1.0, 2.0};
  AdamMoments<double> state;
  state.m = {0.0};
  state.v = {0.0};
  EXPECT_THROW(adam_step<double>(w, std::vector<double>{1.0, 1.0}, state, 1, {}), DimensionError);
  AdamMoments<double> ok;
  EXPECT_THROW(adam_step<double>(w, std::vector<double>{1.0}, ok, 1, {}), DimensionError);
}

TEST(Adam, ParameterWithoutGradientIsUpdatedAsZero) {
  T64 used = T64::from_data({1}, {1.0}, true);
  T64 unused = T64::from_data({1}, {5.0}, true);
  Adam<double> adam({{"used", used}, {"unused", unused}}, {});
  adam.zero_grad();
  ops::sum(ops::hadamard(used, used)).backward();
  adam.step();
  EXPECT_EQ(unused.data()[0], 5.0);
  EXPECT_NEAR(used.data()[0], 1.0 - 1e-3, 1e-9);
  EXPECT_EQ(adam.steps(), 1u);
  adam.set_lr(0.5);
  EXPECT_EQ(adam.lr(), 0.5);
}

TEST(TrainConfig, Validates) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lr = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.lr_decay = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

// Encoded two-field data set; label from `rule(v0, v1)`.
EncodedSet make_set(std::size_t rows, std::uint32_t card, std::uint64_t seed,
                    const std::function<int(std::uint32_t, std::uint32_t)>& rule) {
  std::mt19937_64 rng(seed);
  EncodedSet set;
  set.num_categorical = 2;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto a = static_cast<std::uint32_t>(rng() % card);
    const auto b = static_cast<std::uint32_t>(rng() % card);
    set.categorical.push_back(a);
    set.categorical.push_back(b);
    set.labels.push_back(static_cast<std::uint8_t>(rule(a, b)));
  }
  return set;
}

struct TwoFieldModel {
  FeatureSchema schema{{{"a", FieldKind::kCategorical}, {"b", FieldKind::kCategorical}}};
  Vocabulary vocab;
  explicit TwoFieldModel(std::uint32_t card) {
    std::vector<RawRecord> rows;
    for (std::uint32_t v = 0; v < card; ++v) rows.push_back({{"v" + std::to_string(v), "v" + std::to_string(v)}, {}, 0});
    vocab = build_vocab(rows, schema, 1);
  }
  StecModel<double> model(std::uint64_t seed = 0) const {
    ModelConfig c;
    c.blocks = 1;
    c.dim = 8;
    c.heads = 2;
    c.seed = seed;
    return StecModel<double>(c, schema, vocab);
  }
};

TEST(Fit, LearnsLinearlySeparableSetWithinTenEpochs) {
  const auto rule = [](std::uint32_t a, std::uint32_t) { return a < 3 ? 1 : 0; };
  const EncodedSet train = make_set(800, 6, 1, rule);
  const EncodedSet valid = make_set(100, 6, 2, rule);
  TwoFieldModel toy(6);
  auto model = toy.model();
  TrainConfig config;
  config.batch_size = 64;
  config.max_epochs = 10;
  config.lr = 1e-2;
  const MetricsReport report = fit(model, train, valid, config);
  ASSERT_TRUE(report.best_valid_auc.has_value());
  EXPECT_GT(*report.best_valid_auc, 0.99);
  EXPECT_LE(report.epochs.size(), 10u);
}

TEST(Fit, RisingValidationLossDecaysLearningRateExactlyOnce) {
  // Validation labels are the complement of the training rule, so every
  // epoch of learning makes validation logloss worse.
  const auto rule = [](std::uint32_t a, std::uint32_t b) { return (a + b) % 2; };
  const auto flipped = [&](std::uint32_t a, std::uint32_t b) { return 1 - rule(a, b); };
  const EncodedSet train = make_set(400, 4, 3, rule);
  const EncodedSet valid = make_set(200, 4, 4, flipped);
  TwoFieldModel toy(4);
  auto model = toy.model(1);
  TrainConfig config;
  config.batch_size = 32;
  config.lr = 1e-2;
  config.max_epochs = 20;
  std::ostringstream log;
  const MetricsReport report = fit(model, train, valid, config, &log);
  EXPECT_EQ(report.best_epoch, 1u) << log.str();
  EXPECT_EQ(report.lr_decays, 1u) << log.str();
  EXPECT_TRUE(report.early_stopped);
  ASSERT_EQ(report.epochs.size(), 1u + config.early_stop_rounds) << log.str();
  for (std::size_t e = 1; e < report.epochs.size(); ++e) {
    EXPECT_GT(report.epochs[e].valid_logloss, report.epochs[e - 1].valid_logloss) << log.str();
  }
  EXPECT_DOUBLE_EQ(report.epochs[0].lr, 1e-2);
  EXPECT_TRUE(report.epochs[2].lr_decayed);
  EXPECT_DOUBLE_EQ(report.epochs[3].lr, 1e-3);
}

TEST(Fit, IdenticalSeedAndConfigReproduceTheLossCurve) {
  const auto rule = [](std::uint32_t a, std::uint32_t b) { return a == b ? 1 : 0; };
  const EncodedSet train = make_set(300, 4, 5, rule);
  const EncodedSet valid = make_set(100, 4, 6, rule);
  TwoFieldModel toy(4);
  TrainConfig config;
  config.batch_size = 32;
  config.max_epochs = 4;
  config.seed = 9;
  auto run = [&] {
    auto model = toy.model(2);
    const auto report = fit(model, train, valid, config);
    std::vector<double> curve;
    for (const auto& e : report.epochs) {
      curve.push_back(e.train_loss);
      curve.push_back(e.valid_logloss);
    }
    return curve;
  };
  EXPECT_EQ(run(), run());
}

TEST(Fit, RestoresBestEpochWeights) {
  const auto rule = [](std::uint32_t a, std::uint32_t b) { return (a + b) % 2; };
  const auto flipped = [&](std::uint32_t a, std::uint32_t b) { return 1 - rule(a, b); };
  TwoFieldModel toy(4);
  auto model = toy.model(3);
  const EncodedSet train = make_set(400, 4, 7, rule);
  const EncodedSet valid = make_set(200, 4, 8, flipped);
  TrainConfig config;
  config.batch_size = 32;
  config.lr = 1e-2;
  const auto report = fit(model, train, valid, config);
  const Evaluation after = evaluate(model, valid, config.eval_batch_size);
  EXPECT_EQ(after.logloss, report.best_valid_logloss);
  for (const auto& e : report.epochs) EXPECT_LE(after.logloss, e.valid_logloss);
}

// A click model whose predictions are NaN: training must stop with a
// diagnostic rather than propagate non-finite values.
class NanModel : public CtrModel<double> {
 public:
  Tensor<double> predict(const Batch& batch, ops::NormMode) override {
    return ops::hadamard(ops::reshape(ops::linear(T64::full({batch.size, 1}, 1.0), w_, T64{}), {batch.size}),
                         T64::full({batch.size}, std::nan("")));
  }
  NamedTensors<double> parameters() const override { return {{"w", w_}}; }

 private:
  T64 w_ = T64::from_data({1, 1}, {1.0}, true);
};

TEST(Fit, NonFiniteLossIsReportedAsDivergence) {
  const auto rule = [](std::uint32_t a, std::uint32_t) { return a % 2; };
  NanModel model;
  TrainConfig config;
  config.batch_size = 8;
  EXPECT_THROW(fit(model, make_set(32, 4, 1, rule), make_set(16, 4, 2, rule), config), DivergenceError);
}

TEST(Evaluate, ReportsLoglossAndAucOfInferencePredictions) {
  const auto rule = [](std::uint32_t a, std::uint32_t) { return a % 2; };
  TwoFieldModel toy(4);
  auto model = toy.model(4);
  const EncodedSet set = make_set(50, 4, 3, rule);
  const Evaluation e = evaluate(model, set, 7);
  const auto pred = predict_all(model, set, 13);
  EXPECT_EQ(e.instances, 50u);
  EXPECT_NEAR(e.logloss, logloss(pred, set.labels), 1e-15);
  ASSERT_TRUE(e.auc.has_value());
  EXPECT_DOUBLE_EQ(*e.auc, testing::pair_count_auc(pred, set.labels));
}

}  // namespace
}  // namespace stec
