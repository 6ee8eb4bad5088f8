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

#ifndef STEC_SYNTH_HPP_
#define STEC_SYNTH_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "stec/data.hpp"
#include "stec/embedding.hpp"

// Categorical datasets whose labels come from a known function of field
// pairs, with the Bayes-optimal AUC of the generating process.
namespace stec {

// Score s(record) per rule; the label is 1[s + noise * z > 0], z ~ N(0, 1).
//   kEqual:    s = +1 when field0 == field1 (same value index), else -1.
//   kXor:      s = +1 when the parities of field0 and field1 differ, else -1.
//   kPairwise: s = sum over field pairs i < j of a table T_ij[v_i][v_j] with
//              N(0, 1) entries scaled so that s has unit variance.
//   kNoise:    labels are fair coin flips independent of the fields.
// Fields past the ones a rule reads are uniform distractors.
enum class SynthRule { kEqual, kXor, kPairwise, kNoise };

std::string_view synth_rule_name(SynthRule rule);
SynthRule parse_synth_rule(std::string_view text);

struct SynthSpec {
  std::vector<std::size_t> cardinalities{4, 4};  // one entry per field
  std::size_t rows = 1000;
  SynthRule rule = SynthRule::kPairwise;
  double noise = 0.0;
  std::uint64_t seed = 0;

  // Throws ValueError: fewer than two fields, a field with fewer than two
  // values, no rows, negative noise, or kXor over odd cardinalities (the
  // parity classes would be unbalanced, leaking signal to linear models).
  void validate() const;
};

struct SynthData {
  FeatureSchema schema;            // fields "f0", "f1", ... all categorical
  std::vector<RawRecord> records;  // values "v0", "v1", ...
  std::vector<double> posterior;   // P(label = 1 | fields) per record
  double bayes_auc = 0.5;          // AUC of the posterior over the population
};

SynthData synth(const SynthSpec& spec);

// Population Bayes AUC for a spec. Enumerates the joint value space of the
// fields the rule reads when it has at most 2^20 cells, else estimates from
// 2^18 seeded draws.
double bayes_auc(const SynthSpec& spec);

// Noise level whose Bayes AUC equals `target` within 1e-4, by bisection.
// Requires 0.5 < target < noise-free Bayes AUC.
double calibrate_noise(SynthSpec spec, double target);

// Seeded 8:1:1 split into a LoadedData ready for prepare().
LoadedData split_synth(const SynthData& data, std::uint64_t seed);

}  // namespace stec

#endif  // STEC_SYNTH_HPP_
