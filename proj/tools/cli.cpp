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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "stec/data.hpp"
#include "stec/flops.hpp"
#include "stec/model.hpp"
#include "stec/run_config.hpp"
#include "stec/synth.hpp"
#include "stec/training.hpp"
#include "stec/verify.hpp"
#include "stec/weights.hpp"

#ifndef STEC_VERSION
#define STEC_VERSION "unknown"
#endif

namespace stec::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string hex64(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

std::string real_text(double value) {
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

std::string fixed(double value, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << value;
  return out.str();
}

Json optional_number(const std::optional<double>& value) {
  return value ? Json(*value) : Json(nullptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

// Run directory staged under a hidden name and renamed into place once
// complete, so readers never observe a partial run.
class RunDirectory {
 public:
  RunDirectory(const fs::path& root, const std::string& name,
               const std::string& snapshot_text) {
    std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
    id_ = name + "-" + stamp + "-" + hex64(fnv1a64(snapshot_text)).substr(0, 8);
    fs::create_directories(root);
    final_ = root / id_;
    for (int n = 2; fs::exists(final_); ++n) {
      final_ = root / (id_ + "-" + std::to_string(n));
    }
    staging_ = root / (".staging-" + final_.filename().string());
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }

  ~RunDirectory() {
    if (!committed_) {
      std::error_code ignored;
      fs::remove_all(staging_, ignored);
    }
  }

  const fs::path& staging() const { return staging_; }
  const fs::path& final_path() const { return final_; }

  void commit() {
    fs::rename(staging_, final_);
    committed_ = true;
  }

 private:
  std::string id_;
  fs::path staging_;
  fs::path final_;
  bool committed_ = false;
};

std::string environment_fingerprint(unsigned precision) {
  std::ostringstream out;
  out << "stec_version=" << STEC_VERSION << '\n'
      << "compiler=" << __VERSION__ << '\n'
      << "cplusplus=" << __cplusplus << '\n'
#ifdef NDEBUG
      << "build=release\n"
#else
      << "build=debug\n"
#endif
      << "precision=" << precision << '\n'
      << "hardware_threads=" << std::thread::hardware_concurrency() << '\n'
#if defined(__linux__)
      << "platform=linux\n";
#elif defined(__APPLE__)
      << "platform=darwin\n";
#else
      << "platform=other\n";
#endif
  return out.str();
}

struct Overrides {
  std::string seeds;
  std::string out;
  unsigned precision = 0;
};

RunConfig load_config(const std::string& path, const Overrides& overrides) {
  if (path.empty()) throw ConfigError("--config is required");
  RunConfig config = load_run_config(path);
  if (!overrides.seeds.empty()) config.seeds = parse_seed_list(overrides.seeds);
  if (!overrides.out.empty()) config.out = overrides.out;
  if (overrides.precision) config.precision = overrides.precision;
  config.validate();
  return config;
}

std::size_t field_count(const RunConfig& config) {
  if (config.synthetic) return config.synthetic->spec.cardinalities.size();
  return config.dataset.schema().num_fields();
}

// Raw records of the configured data, split as in training.
LoadedData load_records(const RunConfig& config) {
  if (config.synthetic) {
    SynthSpec spec = config.synthetic->spec;
    if (config.synthetic->target_bayes_auc) {
      spec.noise = calibrate_noise(spec, *config.synthetic->target_bayes_auc);
    }
    return split_synth(synth(spec), config.dataset.seed);
  }
  return load(config.dataset);
}

const std::vector<RawRecord>& pick_split(const LoadedData& data,
                                         const std::string& split) {
  if (split == "train") return data.train;
  if (split == "valid") return data.valid;
  return data.test;
}

Json evaluation_json(const Evaluation& eval) {
  Json j;
  j["instances"] = eval.instances;
  j["auc"] = optional_number(eval.auc);
  j["logloss"] = eval.logloss;
  return j;
}

struct SeedRun {
  std::uint64_t seed = 0;
  MetricsReport report;
  Evaluation valid;
  Evaluation test;
  std::size_t parameters = 0;
  std::string weights_file;
};

template <typename T>
SeedRun train_seed(const RunConfig& config, const PreparedData& data,
                   std::uint64_t seed, const fs::path* weights_dir,
                   std::ostream& log) {
  ModelConfig model_config = config.model;
  model_config.seed = seed;
  TrainConfig train_config = config.train;
  train_config.seed = seed;
  StecModel<T> model = build_variant<T>(model_config, data.schema, data.vocab,
                                        data.normalizer);
  SeedRun run;
  run.seed = seed;
  for (const auto& [name, tensor] : model.parameters()) run.parameters += tensor.size();
  run.report = fit(model, data.train, data.valid, train_config, &log);
  run.valid = evaluate(model, data.valid, config.train.eval_batch_size);
  run.test = evaluate(model, data.test, config.train.eval_batch_size);
  if (weights_dir) {
    run.weights_file = "weights-seed" + std::to_string(seed) + ".bin";
    save_weights(model, *weights_dir / run.weights_file);
  }
  return run;
}

SeedRun train_seed_any(const RunConfig& config, const PreparedData& data,
                       std::uint64_t seed, const fs::path* weights_dir,
                       std::ostream& log) {
  if (config.precision == 32) return train_seed<float>(config, data, seed, weights_dir, log);
  return train_seed<double>(config, data, seed, weights_dir, log);
}

struct Aggregate {
  double max = 0.0, mean = 0.0, std = 0.0;
  std::size_t count = 0;
};

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  a.max = *std::max_element(values.begin(), values.end());
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  for (double v : values) a.std += (v - a.mean) * (v - a.mean);
  a.std = std::sqrt(a.std / static_cast<double>(values.size()));
  return a;
}

Json aggregate_json(const Aggregate& a) {
  return Json{{"max", a.max}, {"mean", a.mean}, {"std", a.std}, {"count", a.count}};
}

Json flops_json(const FlopEstimate& est) {
  Json terms = Json::array();
  for (const auto& term : est.terms) {
    terms.push_back({{"name", term.name}, {"formula", term.formula}, {"count", term.count}});
  }
  return Json{{"total", est.total()}, {"terms", terms}};
}

// ---------------------------------------------------------------- train ---

int cmd_train(const std::string& config_path, const Overrides& overrides,
              std::ostream& out) {
  const RunConfig config = load_config(config_path, overrides);
  const PreparedData data = prepare_run_data(config);
  const std::string snapshot_text = snapshot(config);
  RunDirectory dir(config.out, config.name, snapshot_text);

  out << "run " << config.name << ": " << data.summary.instances << " instances, "
      << data.summary.fields << " fields, " << data.summary.features
      << " features (train " << data.train.size() << ", valid " << data.valid.size()
      << ", test " << data.test.size() << ")\n";

  const FlopEstimate flops = estimate_flops(config.model, data.schema.num_fields());
  std::vector<SeedRun> runs;
  for (std::uint64_t seed : config.seeds) {
    out << "seed " << seed << '\n';
    runs.push_back(train_seed_any(config, data, seed, &dir.staging(), out));
    const SeedRun& r = runs.back();
    out << "seed " << seed << " test_auc="
        << (r.test.auc ? fixed(*r.test.auc, 6) : std::string("undefined"))
        << " test_logloss=" << fixed(r.test.logloss, 6) << '\n';
  }

  std::vector<double> test_auc, test_logloss;
  for (const auto& r : runs) {
    if (r.test.auc) test_auc.push_back(*r.test.auc);
    test_logloss.push_back(r.test.logloss);
  }
  const Aggregate auc_stats = aggregate(test_auc);
  const Aggregate loss_stats = aggregate(test_logloss);

  // Deterministic artifacts: nothing below depends on wall clock or paths
  // of this particular run directory.
  Json metrics;
  metrics["run"] = config.name;
  metrics["config_digest"] = hex64(fnv1a64(snapshot_text));
  metrics["precision"] = config.precision;
  metrics["variant"] = std::string(variant_name(config.model.variant));
  metrics["dataset"] = {{"instances", data.summary.instances},
                        {"fields", data.summary.fields},
                        {"features", data.summary.features},
                        {"train", data.train.size()},
                        {"valid", data.valid.size()},
                        {"test", data.test.size()}};
  metrics["flops"] = flops_json(flops);
  Json seeds = Json::array();
  std::ostringstream report;
  report << "run=" << config.name << '\n'
         << "config_digest=" << hex64(fnv1a64(snapshot_text)) << '\n'
         << "variant=" << variant_name(config.model.variant) << '\n'
         << "precision=" << config.precision << '\n'
         << "dataset.instances=" << data.summary.instances << '\n'
         << "dataset.fields=" << data.summary.fields << '\n'
         << "dataset.features=" << data.summary.features << '\n'
         << "flops=" << flops.total() << '\n';
  std::ostringstream timing;
  for (const auto& r : runs) {
    Json epochs = Json::array();
    for (const auto& e : r.report.epochs) {
      epochs.push_back({{"epoch", e.epoch},
                        {"lr", e.lr},
                        {"train_loss", e.train_loss},
                        {"valid_logloss", e.valid_logloss},
                        {"valid_auc", optional_number(e.valid_auc)},
                        {"improved", e.improved},
                        {"lr_decayed", e.lr_decayed}});
      timing << "seed." << r.seed << ".epoch." << e.epoch
             << ".seconds=" << real_text(e.seconds) << '\n';
    }
    timing << "seed." << r.seed << ".wall_clock_seconds="
           << real_text(r.report.wall_clock_seconds) << '\n';
    seeds.push_back({{"seed", r.seed},
                     {"weights", r.weights_file},
                     {"parameters", r.parameters},
                     {"best_epoch", r.report.best_epoch},
                     {"lr_decays", r.report.lr_decays},
                     {"early_stopped", r.report.early_stopped},
                     {"steps", r.report.steps},
                     {"epochs", epochs},
                     {"valid", evaluation_json(r.valid)},
                     {"test", evaluation_json(r.test)}});
    const std::string p = "seed." + std::to_string(r.seed) + ".";
    report << p << "weights=" << r.weights_file << '\n'
           << p << "best_epoch=" << r.report.best_epoch << '\n'
           << p << "epochs=" << r.report.epochs.size() << '\n'
           << p << "valid_auc=" << (r.valid.auc ? real_text(*r.valid.auc) : "undefined") << '\n'
           << p << "valid_logloss=" << real_text(r.valid.logloss) << '\n'
           << p << "test_auc=" << (r.test.auc ? real_text(*r.test.auc) : "undefined") << '\n'
           << p << "test_logloss=" << real_text(r.test.logloss) << '\n';
  }
  metrics["seeds"] = seeds;
  metrics["aggregate"] = {{"test_auc", aggregate_json(auc_stats)},
                          {"test_logloss", aggregate_json(loss_stats)}};
  report << "aggregate.test_auc.max=" << real_text(auc_stats.max) << '\n'
         << "aggregate.test_auc.mean=" << real_text(auc_stats.mean) << '\n'
         << "aggregate.test_auc.std=" << real_text(auc_stats.std) << '\n'
         << "aggregate.test_logloss.mean=" << real_text(loss_stats.mean) << '\n';

  write_text(dir.staging() / "metrics.json", metrics.dump(2) + "\n");
  write_text(dir.staging() / "report.txt", report.str());
  write_text(dir.staging() / "config.ini", snapshot_text);
  write_text(dir.staging() / "environment.txt", environment_fingerprint(config.precision));
  write_text(dir.staging() / "timing.txt", timing.str());
  if (data.split) {
    // Split index lists make the partition auditable.
    for (const auto& [name, list] : {std::pair{"train", &data.split->train},
                                     std::pair{"valid", &data.split->valid},
                                     std::pair{"test", &data.split->test}}) {
      std::ostringstream lines;
      for (std::size_t i : *list) lines << i << '\n';
      write_text(dir.staging() / (std::string("split-") + name + ".txt"), lines.str());
    }
  }
  dir.commit();
  out << "aggregate test_auc max=" << fixed(auc_stats.max, 6)
      << " mean=" << fixed(auc_stats.mean, 6) << " std=" << fixed(auc_stats.std, 6) << '\n'
      << "run directory: " << dir.final_path().string() << '\n';
  return kOk;
}

// ----------------------------------------------------------------- eval ---

template <typename T>
std::string eval_weights(const WeightFile& file, const RunConfig& config,
                         const std::string& split) {
  StecModel<T> model = from_weight_file<T>(file);
  const LoadedData data = load_records(config);
  if (!(data.schema == model.schema())) {
    throw SchemaError("schema mismatch: dataset has " +
                      std::to_string(data.schema.num_fields()) +
                      " fields, weights were trained on " +
                      std::to_string(model.schema().num_fields()));
  }
  const EncodedSet set = encode(pick_split(data, split), model.schema(),
                                model.vocab(), model.normalizer());
  if (set.size() == 0) throw DataError("split '" + split + "' is empty");
  const Evaluation eval = evaluate(model, set, config.train.eval_batch_size);
  std::ostringstream report;
  report << "split=" << split << '\n'
         << "variant=" << variant_name(model.config().variant) << '\n'
         << "instances=" << eval.instances << '\n'
         << "auc=" << (eval.auc ? real_text(*eval.auc) : "undefined") << '\n'
         << "logloss=" << real_text(eval.logloss) << '\n';
  return report.str();
}

int cmd_eval(const std::string& config_path, const std::string& weights,
             const std::string& split, const Overrides& overrides,
             std::ostream& out) {
  if (weights.empty()) throw ConfigError("--weights is required");
  Overrides no_out = overrides;
  no_out.out.clear();
  const RunConfig config = load_config(config_path, no_out);
  const WeightFile file = read_weight_file(weights);
  const std::string report = file.precision_bits == 32
                                 ? eval_weights<float>(file, config, split)
                                 : eval_weights<double>(file, config, split);
  out << report;
  if (!overrides.out.empty()) {
    fs::create_directories(overrides.out);
    write_text(fs::path(overrides.out) / ("eval-" + split + ".txt"), report);
  }
  return kOk;
}

// --------------------------------------------------------------- ablate ---

std::string bilinear_flag(Variant v) { return traits(v).explicit_bilinear ? "Exp" : "Imp"; }

std::string fusion_flag(Variant v) {
  switch (traits(v).fusion) {
    case Fusion::kConcat:
      return "Concat";
    case Fusion::kLastOnly:
      return "Last Only";
    case Fusion::kAdd:
      return "Add";
  }
  return "?";
}

std::string ffn_flag(Variant v) { return traits(v).use_ffn ? "yes" : "no"; }

int cmd_ablate(const std::vector<std::string>& config_paths,
               const Overrides& overrides, std::ostream& out) {
  if (config_paths.empty()) throw ConfigError("--config is required");
  std::vector<RunConfig> configs;
  for (const auto& path : config_paths) configs.push_back(load_config(path, overrides));
  const std::vector<Variant> variants = all_variants();
  // best[c][v]: max test AUC over seeds, as is customary for the table.
  std::vector<std::vector<Aggregate>> cells(configs.size());
  Json columns = Json::array();
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const RunConfig& base = configs[c];
    const PreparedData data = prepare_run_data(base);
    Json rows = Json::array();
    for (Variant v : variants) {
      RunConfig config = base;
      config.model.variant = v;
      std::vector<double> aucs;
      std::ostringstream quiet;
      for (std::uint64_t seed : config.seeds) {
        const SeedRun r = train_seed_any(config, data, seed, nullptr, quiet);
        if (r.test.auc) aucs.push_back(*r.test.auc);
      }
      cells[c].push_back(aggregate(aucs));
      out << base.name << ' ' << variant_name(v) << " test_auc max="
          << fixed(cells[c].back().max, 6) << '\n';
      rows.push_back({{"variant", std::string(variant_name(v))},
                      {"test_auc", aggregate_json(cells[c].back())}});
    }
    columns.push_back({{"dataset", base.name}, {"rows", rows}});
  }

  std::ostringstream table;
  table << std::left << std::setw(10) << "Model" << " | " << std::setw(8) << "Bilinear"
        << " | " << std::setw(9) << "Fusion" << " | " << std::setw(3) << "FFN";
  for (const auto& c : configs) table << " | " << std::setw(10) << c.name;
  table << '\n';
  for (std::size_t v = 0; v < variants.size(); ++v) {
    table << std::left << std::setw(10) << variant_name(variants[v]) << " | "
          << std::setw(8) << bilinear_flag(variants[v]) << " | " << std::setw(9)
          << fusion_flag(variants[v]) << " | " << std::setw(3) << ffn_flag(variants[v]);
    for (std::size_t c = 0; c < configs.size(); ++c) {
      table << " | " << std::setw(10) << fixed(100.0 * cells[c][v].max, 2);
    }
    table << '\n';
  }
  out << table.str();

  std::string digest_input;
  for (const auto& c : configs) digest_input += snapshot(c);
  RunDirectory dir(configs.front().out, "ablate", digest_input);
  Json result{{"columns", columns}};
  write_text(dir.staging() / "ablation.json", result.dump(2) + "\n");
  write_text(dir.staging() / "ablation.txt", table.str());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    write_text(dir.staging() / ("config-" + std::to_string(c) + ".ini"), snapshot(configs[c]));
  }
  write_text(dir.staging() / "environment.txt",
             environment_fingerprint(configs.front().precision));
  dir.commit();
  out << "run directory: " << dir.final_path().string() << '\n';
  return kOk;
}

// --------------------------------------------------------------- verify ---

int cmd_verify(std::uint64_t seed, std::size_t cases, bool inject_fault,
               std::ostream& out) {
  VerifyOptions options;
  options.seed = seed;
  options.equivalence_cases = cases;
  options.inject_fault = inject_fault;
  bool all = true;
  for (const PropertyResult& r : run_verify(options)) {
    all = all && r.passed;
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " max_error=" << r.max_error
        << " tolerance=" << r.tolerance << " cases=" << r.cases
        << " seconds=" << fixed(r.seconds, 3) << " | " << r.detail << '\n';
  }
  out << (all ? "all properties passed" : "property failures detected") << '\n';
  return all ? kOk : kPropertyFailure;
}

// ---------------------------------------------------------------- flops ---

int cmd_flops(const std::string& config_path, std::size_t fields,
              std::ostream& out) {
  ModelConfig model;
  std::string name = "default";
  if (!config_path.empty()) {
    // Only the model section and the field count matter here, so the data
    // files need not be present.
    const RunConfig config = load_run_config(config_path);
    config.model.validate();
    model = config.model;
    name = config.name;
    if (!fields) fields = field_count(config);
  }
  if (fields < 2) throw ConfigError("--fields must be at least 2 (or give --config)");
  const FlopEstimate stec = estimate_flops(model, fields);
  const AutoIntConfig autoint_config = AutoIntConfig::matching(model);
  const FlopEstimate autoint = estimate_autoint_flops(autoint_config, fields);
  auto print = [&](const std::string& title, const FlopEstimate& est) {
    out << title << '\n';
    for (const auto& term : est.terms) {
      out << "  " << std::left << std::setw(28) << term.name << std::setw(24)
          << term.formula << std::right << std::setw(14) << term.count << '\n';
    }
    out << "  " << std::left << std::setw(52) << "total" << std::right << std::setw(14)
        << est.total() << '\n';
  };
  out << "config " << name << ": variant=" << variant_name(model.variant)
      << " N=" << model.blocks << " d=" << model.dim << " H=" << model.heads
      << " f=" << fields << '\n';
  print("STEC (" + std::string(variant_name(model.variant)) + ")", stec);
  print("AutoInt-style stacked attention (head_dim=" +
            std::to_string(autoint_config.head_dim) + ", dnn 400x3)",
        autoint);
  out << "ratio autoint/stec=" << fixed(static_cast<double>(autoint.total()) /
                                            static_cast<double>(stec.total()), 3)
      << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"STEC click-through-rate models: train, evaluate, ablate, verify"};
  app.require_subcommand(1);
  std::vector<std::string> configs;
  std::string weights, split = "test";
  Overrides overrides;
  std::uint64_t verify_seed = 0;
  std::size_t cases = 100, fields = 0;
  bool inject_fault = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", overrides.seeds, "Seed list, e.g. 1,2,3");
    cmd->add_option("--out", overrides.out, "Output directory");
    cmd->add_option("--precision", overrides.precision, "Floating point width")
        ->check(CLI::IsMember({32u, 64u}));
  };
  CLI::App* train = app.add_subcommand("train", "Train one model per seed");
  train->add_option("--config", configs, "Run configuration (INI)")->required();
  add_common(train);
  CLI::App* eval = app.add_subcommand("eval", "Evaluate saved weights on a split");
  eval->add_option("--config", configs, "Run configuration (INI)")->required();
  eval->add_option("--weights", weights, "Weight file")->required();
  eval->add_option("--split", split, "train, valid or test")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  add_common(eval);
  CLI::App* ablate = app.add_subcommand("ablate", "Train every variant and compare");
  ablate->add_option("--config", configs, "Run configuration, one per dataset")->required();
  add_common(ablate);
  CLI::App* verify = app.add_subcommand("verify", "Run the built-in property checks");
  verify->add_option("--seed", verify_seed, "Seed of the random cases");
  verify->add_option("--cases", cases, "Random equivalence configurations");
  verify->add_flag("--inject-fault", inject_fault, "Perturb weights to force a failure");
  CLI::App* flops = app.add_subcommand("flops", "Analytic FLOP estimates");
  flops->add_option("--config", configs, "Run configuration (INI)");
  flops->add_option("--fields", fields, "Field count override");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
  auto first = [&]() { return configs.empty() ? std::string() : configs.front(); };
  try {
    if (*train) {
      if (configs.size() != 1) throw ConfigError("train takes exactly one --config");
      return cmd_train(first(), overrides, out);
    }
    if (*eval) return cmd_eval(first(), weights, split, overrides, out);
    if (*ablate) return cmd_ablate(configs, overrides, out);
    if (*verify) return cmd_verify(verify_seed, cases, inject_fault, out);
    if (*flops) return cmd_flops(first(), fields, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kValidationError;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kValidationError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kValidationError;
  } catch (const FormatError& e) {
    err << "weight file error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kValidationError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace stec::cli
