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

#ifndef STEC_RUN_CONFIG_HPP_
#define STEC_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stec/data.hpp"
#include "stec/model.hpp"
#include "stec/synth.hpp"
#include "stec/training.hpp"

// Run description read from an INI file with [data], [model], [train] and
// [run] sections. Unknown keys are rejected so typos cannot silently fall
// back to defaults. Relative paths resolve against the file's directory.
namespace stec {

struct SynthSource {
  SynthSpec spec;
  // When set, the noise level is calibrated to this Bayes AUC.
  std::optional<double> target_bayes_auc;
};

struct RunConfig {
  std::string name = "run";
  DatasetSpec dataset;
  std::filesystem::path schema_path;
  bool streaming = false;
  std::optional<SynthSource> synthetic;  // replaces file input when set
  ModelConfig model;
  TrainConfig train;
  // Each seed drives model initialization, dropout and batch order; the data
  // split keeps the [data] seed so every run sees the same split.
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path out = "runs";
  unsigned precision = 64;

  // Throws ConfigError for invalid values or missing input files.
  void validate() const;
};

RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical INI of the effective configuration; parse_run_config of the
// snapshot yields the same configuration.
std::string snapshot(const RunConfig& config);

// "1,2,3" -> {1, 2, 3}. Throws ConfigError.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
std::vector<std::size_t> parse_size_list(std::string_view text);

// Loads (or generates) the configured data and encodes it.
PreparedData prepare_run_data(const RunConfig& config);

}  // namespace stec

#endif  // STEC_RUN_CONFIG_HPP_
