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
#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stec/model.hpp"
#include "stec/synth.hpp"
#include "stec/training.hpp"

namespace stec {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Population AUC of a score taking value `hi` on a fraction `p` of cells
// with P(y=1) = a, and `lo` elsewhere with P(y=1) = 1 - a; ties count half.
double two_level_auc(double p, double a) {
  const double pos_hi = p * a, pos_lo = (1 - p) * (1 - a);
  const double neg_hi = p * (1 - a), neg_lo = (1 - p) * a;
  const double pos = pos_hi + pos_lo, neg = neg_hi + neg_lo;
  return (pos_hi * neg_lo + 0.5 * (pos_hi * neg_hi + pos_lo * neg_lo)) / (pos * neg);
}

std::vector<std::uint8_t> labels_of(const SynthData& data) {
  std::vector<std::uint8_t> y;
  for (const auto& r : data.records) y.push_back(static_cast<std::uint8_t>(r.label));
  return y;
}

TEST(Synth, NameRoundTrip) {
  for (SynthRule rule : {SynthRule::kEqual, SynthRule::kXor, SynthRule::kPairwise,
                         SynthRule::kNoise}) {
    EXPECT_EQ(parse_synth_rule(synth_rule_name(rule)), rule);
  }
  EXPECT_THROW(parse_synth_rule("parity"), ConfigError);
}

TEST(Synth, ValidateRejectsDegenerateSpecs) {
  SynthSpec spec;
  EXPECT_NO_THROW(spec.validate());
  SynthSpec one_field = spec;
  one_field.cardinalities = {4};
  EXPECT_THROW(one_field.validate(), ValueError);
  SynthSpec unary = spec;
  unary.cardinalities = {4, 1};
  EXPECT_THROW(unary.validate(), ValueError);
  SynthSpec empty = spec;
  empty.rows = 0;
  EXPECT_THROW(empty.validate(), ValueError);
  SynthSpec negative = spec;
  negative.noise = -0.1;
  EXPECT_THROW(negative.validate(), ValueError);
  SynthSpec odd_xor = spec;
  odd_xor.rule = SynthRule::kXor;
  odd_xor.cardinalities = {3, 4};
  EXPECT_THROW(odd_xor.validate(), ValueError);
}

TEST(Synth, SchemaAndValueNames) {
  SynthSpec spec;
  spec.cardinalities = {3, 5, 2};
  spec.rows = 200;
  const SynthData data = synth(spec);
  ASSERT_EQ(data.schema.num_fields(), 3u);
  EXPECT_EQ(data.schema.num_categorical(), 3u);
  EXPECT_EQ(data.records.size(), 200u);
  EXPECT_EQ(data.posterior.size(), 200u);
  for (const auto& r : data.records) {
    ASSERT_EQ(r.categorical.size(), 3u);
    for (std::size_t f = 0; f < 3; ++f) {
      const int v = std::stoi(r.categorical[f].substr(1));
      EXPECT_EQ(r.categorical[f][0], 'v');
      EXPECT_GE(v, 0);
      EXPECT_LT(v, static_cast<int>(spec.cardinalities[f]));
    }
  }
}

TEST(Synth, EqualityRuleWithoutNoiseIsDeterministic) {
  SynthSpec spec;
  spec.rule = SynthRule::kEqual;
  spec.cardinalities = {4, 4};
  spec.rows = 500;
  const SynthData data = synth(spec);
  EXPECT_DOUBLE_EQ(data.bayes_auc, 1.0);
  for (std::size_t r = 0; r < data.records.size(); ++r) {
    const auto& rec = data.records[r];
    const int expected = rec.categorical[0] == rec.categorical[1] ? 1 : 0;
    EXPECT_EQ(rec.label, expected);
    EXPECT_DOUBLE_EQ(data.posterior[r], expected);
  }
}

TEST(Synth, EqualityRuleBayesAucMatchesClosedForm) {
  for (double noise : {0.5, 1.0, 2.0}) {
    SynthSpec spec;
    spec.rule = SynthRule::kEqual;
    spec.cardinalities = {4, 4, 3};
    spec.noise = noise;
    const double a = normal_cdf(1.0 / noise);
    EXPECT_NEAR(bayes_auc(spec), two_level_auc(0.25, a), 1e-12) << noise;
    spec.rows = 50;
    const SynthData data = synth(spec);
    for (std::size_t r = 0; r < data.records.size(); ++r) {
      const auto& rec = data.records[r];
      const double expected = rec.categorical[0] == rec.categorical[1] ? a : 1 - a;
      EXPECT_NEAR(data.posterior[r], expected, 1e-12);
    }
  }
}

TEST(Synth, NoiseRuleHasChanceBayesAucAndBalancedLabels) {
  SynthSpec spec;
  spec.rule = SynthRule::kNoise;
  spec.rows = 20000;
  const SynthData data = synth(spec);
  EXPECT_DOUBLE_EQ(data.bayes_auc, 0.5);
  double positives = 0;
  for (const auto& r : data.records) positives += r.label;
  EXPECT_NEAR(positives / spec.rows, 0.5, 0.02);
}

TEST(Synth, SameSeedSameData) {
  SynthSpec spec;
  spec.noise = 0.5;
  spec.rows = 300;
  spec.seed = 17;
  const SynthData a = synth(spec);
  const SynthData b = synth(spec);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.posterior, b.posterior);
  spec.seed = 18;
  EXPECT_NE(synth(spec).records, a.records);
}

TEST(Synth, EmpiricalPosteriorAucTracksPopulationBayesAuc) {
  SynthSpec spec;
  spec.cardinalities = {6, 6, 6};
  spec.noise = 0.7;
  spec.rows = 40000;
  spec.seed = 3;
  const SynthData data = synth(spec);
  EXPECT_NEAR(auc(data.posterior, labels_of(data)), data.bayes_auc, 0.01);
}

TEST(Synth, PairwiseScoreHasUnitVarianceWithoutNoise) {
  // Without noise the posterior is the 0/1 sign of s, whose mean is P(s > 0).
  SynthSpec spec;
  spec.cardinalities = {5, 5, 5};
  spec.rows = 10;
  EXPECT_DOUBLE_EQ(bayes_auc(spec), 1.0);
}

TEST(Synth, BayesAucFallsWithNoise) {
  SynthSpec spec;
  spec.cardinalities = {8, 8, 8, 8};
  double previous = 1.0;
  for (double noise : {0.0, 0.1, 0.3, 0.6, 1.0, 2.0}) {
    spec.noise = noise;
    const double value = bayes_auc(spec);
    EXPECT_LE(value, previous + 1e-12) << noise;
    EXPECT_GT(value, 0.5);
    previous = value;
  }
}

TEST(Synth, CalibrateNoiseHitsTarget) {
  SynthSpec spec;
  spec.cardinalities = {8, 8, 8, 8};
  for (double target : {0.95, 0.8}) {
    const double noise = calibrate_noise(spec, target);
    spec.noise = noise;
    EXPECT_NEAR(bayes_auc(spec), target, 1e-4) << target;
    EXPECT_GT(noise, 0.0);
  }
  EXPECT_THROW(calibrate_noise(spec, 0.5), ValueError);
  EXPECT_THROW(calibrate_noise(spec, 1.0), ValueError);
}

TEST(Synth, XorFieldsAreMarginallyUninformative) {
  SynthSpec spec;
  spec.rule = SynthRule::kXor;
  spec.cardinalities = {4, 4};
  spec.rows = 40000;
  spec.seed = 5;
  const SynthData data = synth(spec);
  EXPECT_DOUBLE_EQ(data.bayes_auc, 1.0);
  for (std::size_t f = 0; f < 2; ++f) {
    std::map<std::string, std::pair<double, double>> rate;  // positives, count
    for (const auto& r : data.records) {
      auto& [pos, count] = rate[r.categorical[f]];
      pos += r.label;
      count += 1;
    }
    for (const auto& [value, pc] : rate) {
      EXPECT_NEAR(pc.first / pc.second, 0.5, 0.03) << "field " << f << " " << value;
    }
  }
}

TEST(Synth, SplitIsEightOneOneAndSeeded) {
  SynthSpec spec;
  spec.rows = 1000;
  const SynthData data = synth(spec);
  const LoadedData a = split_synth(data, 4);
  const LoadedData b = split_synth(data, 4);
  EXPECT_EQ(a.train.size(), 800u);
  EXPECT_EQ(a.valid.size(), 100u);
  EXPECT_EQ(a.test.size(), 100u);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(split_synth(data, 5).test, a.test);
}

TEST(Synth, XorDefeatsLinearBaselineButNotPairwiseModel) {
  SynthSpec spec;
  spec.rule = SynthRule::kXor;
  spec.cardinalities = {4, 4, 4};
  spec.rows = 4000;
  spec.seed = 2;
  const PreparedData data = prepare(split_synth(synth(spec), 2), 1);
  TrainConfig config;
  config.batch_size = 128;
  config.lr = 1e-2;
  config.max_epochs = 10;

  LinearBaseline<double> linear(data.schema, data.vocab, 0);
  fit(linear, data.train, data.valid, config);
  const Evaluation linear_eval = evaluate(linear, data.test);
  ASSERT_TRUE(linear_eval.auc.has_value());
  EXPECT_LE(*linear_eval.auc, 0.60);

  ModelConfig mc;
  mc.blocks = 1;
  mc.dim = 8;
  mc.heads = 2;
  StecModel<double> model(mc, data.schema, data.vocab);
  fit(model, data.train, data.valid, config);
  const Evaluation stec_eval = evaluate(model, data.test);
  ASSERT_TRUE(stec_eval.auc.has_value());
  EXPECT_GT(*stec_eval.auc, 0.95);
}

}  // namespace
}  // namespace stec
