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

// Acceptance checks that need no external data. Prints one PASS/FAIL line
// per criterion with the measured value and the pinned threshold, then
// exits 1 if any criterion failed.
//
//   stec_acceptance <configs-dir>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stec/flops.hpp"
#include "stec/model.hpp"
#include "stec/run_config.hpp"
#include "stec/synth.hpp"
#include "stec/training.hpp"
#include "stec/verify.hpp"

#ifdef STEC_HAVE_CLI
#include "cli.hpp"
#endif

namespace stec {
namespace {

namespace fs = std::filesystem;

// Pinned thresholds.
constexpr std::size_t kEquivalenceCases = 100;
constexpr double kEquivalenceTolerance = 1e-10;
constexpr double kEquivalenceSeconds = 10.0;
constexpr double kGradientTolerance = 1e-4;
constexpr double kGradientSeconds = 60.0;
constexpr double kSyntheticAuc = 0.90;
constexpr std::size_t kSyntheticEpochs = 20;
constexpr double kXorLinearAuc = 0.60;
constexpr double kAblationSlack = 0.001;  // 0.1 AUC points
const std::vector<std::uint64_t> kAblationSeeds = {0, 1, 2};

struct Line {
  std::string id;
  bool passed;
  std::string detail;
};

std::vector<Line> g_lines;

void report(const std::string& id, bool passed, const std::string& detail) {
  g_lines.push_back({id, passed, detail});
  std::cout << (passed ? "PASS " : "FAIL ") << id << ": " << detail << std::endl;
}

template <typename F>
double timed(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string num(double v, int precision = 6) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

void criterion_1() {
  VerifyOptions options;
  options.equivalence_cases = kEquivalenceCases;
  PropertyResult r;
  const double seconds = timed([&] { r = check_bilinear_equivalence(options); });
  const bool ok = r.passed && r.cases >= kEquivalenceCases &&
                  r.max_error < kEquivalenceTolerance && seconds < kEquivalenceSeconds;
  report("1 bilinear-attention equivalence", ok,
         "cases=" + std::to_string(r.cases) + " max_abs_error=" + num(r.max_error) +
             " (< " + num(kEquivalenceTolerance) + ") seconds=" + num(seconds, 3) +
             " (< " + num(kEquivalenceSeconds) + ")");
}

void criterion_2() {
  PropertyResult r;
  const double seconds = timed([&] { r = check_model_gradients(0); });
  const bool ok = r.passed && r.max_error < kGradientTolerance && seconds < kGradientSeconds;
  report("2 gradient correctness", ok,
         "entries=" + std::to_string(r.cases) + " max_rel_error=" + num(r.max_error) +
             " (< " + num(kGradientTolerance) + ") seconds=" + num(seconds, 3) + " (< " +
             num(kGradientSeconds) + ") " + r.detail);
}

void criterion_3() {
  const PropertyResult a = check_auc_oracle(0);
  const PropertyResult b = check_bce_values();
  report("3 metric oracles", a.passed && b.passed && a.max_error == 0.0 && b.max_error <= 1e-9,
         "auc instances=" + std::to_string(a.cases) + " max_diff=" + num(a.max_error) +
             " (exact); bce max_error=" + num(b.max_error) + " (<= 1e-9)");
}

double train_and_test(const RunConfig& config, const PreparedData& data, Variant variant,
                      std::uint64_t seed, std::size_t* epochs = nullptr) {
  ModelConfig mc = config.model;
  mc.variant = variant;
  mc.seed = seed;
  TrainConfig tc = config.train;
  tc.seed = seed;
  StecModel<double> model = build_variant<double>(mc, data.schema, data.vocab, data.normalizer);
  const MetricsReport fit_report = fit(model, data.train, data.valid, tc);
  if (epochs) *epochs = fit_report.epochs.size();
  const Evaluation eval = evaluate(model, data.test);
  return eval.auc.value_or(0.0);
}

void criterion_4(const RunConfig& config, const PreparedData& data) {
  std::size_t epochs = 0;
  const double stec_auc = train_and_test(config, data, Variant::kStec, 0, &epochs);
  SynthSpec bayes_spec = config.synthetic->spec;
  bayes_spec.noise = calibrate_noise(bayes_spec, *config.synthetic->target_bayes_auc);
  const bool stec_ok = stec_auc >= kSyntheticAuc && epochs <= kSyntheticEpochs &&
                       config.train.max_epochs <= kSyntheticEpochs;

  SynthSpec xor_spec;
  xor_spec.rule = SynthRule::kXor;
  xor_spec.cardinalities = config.synthetic->spec.cardinalities;
  xor_spec.rows = config.synthetic->spec.rows;
  xor_spec.seed = config.synthetic->spec.seed;
  const PreparedData xor_data = prepare(split_synth(synth(xor_spec), config.dataset.seed), 1);
  LinearBaseline<double> linear(xor_data.schema, xor_data.vocab, 0);
  TrainConfig tc = config.train;
  fit(linear, xor_data.train, xor_data.valid, tc);
  const double linear_auc = evaluate(linear, xor_data.test).auc.value_or(0.0);

  report("4 synthetic learnability", stec_ok && linear_auc <= kXorLinearAuc,
         "pairwise rows=" + std::to_string(config.synthetic->spec.rows) +
             " bayes_auc=" + num(bayes_auc(bayes_spec), 4) + " STEC test_auc=" +
             num(stec_auc, 4) + " (>= " + num(kSyntheticAuc) + ") epochs=" +
             std::to_string(epochs) + " (<= " + std::to_string(kSyntheticEpochs) +
             "); XOR linear test_auc=" + num(linear_auc, 4) + " (<= " +
             num(kXorLinearAuc) + ")");
}

void criterion_7(const RunConfig& config, const PreparedData& data) {
  auto best = [&](Variant v) {
    double out = 0.0;
    for (std::uint64_t seed : kAblationSeeds) {
      out = std::max(out, train_and_test(config, data, v, seed));
    }
    return out;
  };
  const double stec = best(Variant::kStec);
  const double f = best(Variant::kF);
  const double lo = best(Variant::kLO);
  const bool ok = stec >= f - kAblationSlack && f >= lo - kAblationSlack;
  report("7 ablation direction (synthetic pairwise)", ok,
         "max over seeds 0,1,2: STEC=" + num(100 * stec, 4) + " STEC_F=" + num(100 * f, 4) +
             " STEC_LO=" + num(100 * lo, 4) +
             " (STEC >= STEC_F >= STEC_LO within 0.1 points); Frappe half is in "
             "acceptance_datasets");
}

void criterion_8() {
  bool ok = true;
  std::string detail;
  const FeatureSchema schema({{"a", FieldKind::kCategorical},
                              {"b", FieldKind::kCategorical},
                              {"c", FieldKind::kCategorical}});
  std::vector<RawRecord> rows;
  for (int v = 0; v < 3; ++v) {
    const std::string t = "v" + std::to_string(v);
    rows.push_back({{t, t, t}, {}, v % 2});
  }
  const Vocabulary vocab = build_vocab(rows, schema, 1);
  Batch batch;
  batch.size = 4;
  batch.categorical = {0, 1, 2, 1, 0, 2, 2, 2, 1, 0, 0, 0};
  batch.labels = {0, 1, 0, 1};
  for (std::size_t n = 1; n <= 3; ++n) {
    ModelConfig mc;
    mc.blocks = n;
    mc.dim = 8;
    mc.heads = 2;
    StecModel<double> model(mc, schema, vocab);
    const ForwardResult<double> out = model.forward(batch, ops::NormMode::kTrain);
    const bool level_ok = out.bilinear.size() == n + 1 && out.fused.size() == n + 1 &&
                          model.fused_levels() == n + 1;
    ok = ok && level_ok;
    detail += "N=" + std::to_string(n) + ":" + std::to_string(out.fused.size()) + " ";
  }
  report("8 level-count invariant", ok, detail + "(expected N+1 fused tensors)");
}

void criterion_9(const fs::path& configs) {
#ifdef STEC_HAVE_CLI
  testing::TempDir dir("acceptance");
  // The shipped synthetic config at a reduced row count and epoch budget:
  // determinism does not depend on run length.
  RunConfig config = load_run_config(configs / "synthetic.ini");
  config.synthetic->spec.rows = 2000;
  config.train.max_epochs = 3;
  config.precision = 64;
  config.seeds = {5};
  config.out = dir.path() / "runs";
  testing::write_text(dir / "run.ini", snapshot(config));
  std::ostringstream out, err;
  std::vector<fs::path> metrics;
  bool ran = true;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ran = ran && cli::run({"train", "--config", (dir / "run.ini").string()}, out, err) == 0;
  }
  for (const auto& entry : fs::directory_iterator(dir.path() / "runs")) {
    if (fs::exists(entry.path() / "metrics.json")) metrics.push_back(entry.path() / "metrics.json");
  }
  const bool ok = ran && metrics.size() == 2 &&
                  testing::read_text(metrics[0]) == testing::read_text(metrics[1]);
  report("9 determinism", ok,
         "two `stec train` runs, 64-bit, seed 5: metrics.json " +
             std::string(ok ? "byte-identical" : "differs or missing") + " (" +
             std::to_string(metrics.size()) + " files)" + (ran ? "" : " " + err.str()));
#else
  (void)configs;
  report("9 determinism", false, "built without the CLI; cannot run the check");
#endif
}

void criterion_10(const fs::path& configs) {
  const RunConfig frappe = load_run_config(configs / "frappe.ini");
  const std::size_t fields = frappe.dataset.schema().num_fields();
  const std::uint64_t stec = estimate_flops(frappe.model, fields).total();
  const std::uint64_t autoint =
      estimate_autoint_flops(AutoIntConfig::matching(frappe.model), fields).total();
  report("10 FLOP ordering", stec < autoint,
         "frappe config f=" + std::to_string(fields) + ": STEC=" + std::to_string(stec) +
             " < AutoInt-style=" + std::to_string(autoint));
}

}  // namespace
}  // namespace stec

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: stec_acceptance <configs-dir>\n";
    return 2;
  }
  const std::filesystem::path configs = argv[1];
  try {
    stec::criterion_1();
    stec::criterion_2();
    stec::criterion_3();
    const stec::RunConfig synthetic = stec::load_run_config(configs / "synthetic.ini");
    synthetic.validate();
    const stec::PreparedData data = stec::prepare_run_data(synthetic);
    stec::criterion_4(synthetic, data);
    stec::criterion_7(synthetic, data);
    stec::criterion_8();
    stec::criterion_9(configs);
    stec::criterion_10(configs);
  } catch (const std::exception& e) {
    stec::report("acceptance harness", false, e.what());
  }
  std::size_t failed = 0;
  for (const auto& line : stec::g_lines) failed += !line.passed;
  std::cout << (failed ? "FAILED " : "OK ") << stec::g_lines.size() - failed << "/"
            << stec::g_lines.size() << " criteria passed (5, 6 and the Frappe half of 7 "
            << "are checked by acceptance_datasets)" << std::endl;
  return failed ? 1 : 0;
}
