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

#include "stec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace stec {

namespace {

constexpr std::uint64_t kTableStream = 0x5DEECE66DULL;
constexpr std::size_t kMaxEnumeratedCells = std::size_t{1} << 20;
constexpr std::size_t kSampledCells = std::size_t{1} << 18;

// The label-generating function shared by synth() and bayes_auc().
class Generator {
 public:
  explicit Generator(const SynthSpec& spec) : spec_(spec) {
    spec.validate();
    if (spec.rule != SynthRule::kPairwise) return;
    const std::size_t f = spec.cardinalities.size();
    const double pairs = static_cast<double>(f * (f - 1) / 2);
    std::mt19937_64 rng(spec.seed ^ kTableStream);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(pairs));
    for (std::size_t i = 0; i < f; ++i) {
      for (std::size_t j = i + 1; j < f; ++j) {
        std::vector<double> table(spec.cardinalities[i] * spec.cardinalities[j]);
        for (double& entry : table) entry = normal(rng);
        tables_.push_back(std::move(table));
      }
    }
  }

  // Number of leading fields the rule reads.
  std::size_t read_fields() const {
    switch (spec_.rule) {
      case SynthRule::kEqual:
      case SynthRule::kXor:
        return 2;
      case SynthRule::kPairwise:
        return spec_.cardinalities.size();
      case SynthRule::kNoise:
        return 0;
    }
    return 0;
  }

  double score(const std::vector<std::size_t>& v) const {
    switch (spec_.rule) {
      case SynthRule::kEqual:
        return v[0] == v[1] ? 1.0 : -1.0;
      case SynthRule::kXor:
        return (v[0] % 2) != (v[1] % 2) ? 1.0 : -1.0;
      case SynthRule::kPairwise: {
        const std::size_t f = spec_.cardinalities.size();
        double s = 0.0;
        std::size_t t = 0;
        for (std::size_t i = 0; i < f; ++i) {
          for (std::size_t j = i + 1; j < f; ++j, ++t) {
            s += tables_[t][v[i] * spec_.cardinalities[j] + v[j]];
          }
        }
        return s;
      }
      case SynthRule::kNoise:
        return 0.0;
    }
    return 0.0;
  }

  // P(label = 1 | fields).
  double posterior(const std::vector<std::size_t>& v) const {
    if (spec_.rule == SynthRule::kNoise) return 0.5;
    const double s = score(v);
    if (spec_.noise == 0.0) return s > 0.0 ? 1.0 : 0.0;
    return 0.5 * std::erfc(-s / (spec_.noise * std::sqrt(2.0)));
  }

 private:
  const SynthSpec& spec_;
  std::vector<std::vector<double>> tables_;
};

// AUC of the posterior as a ranking score when each cell carries weight w
// and positive mass w * q.
double weighted_auc(std::vector<double> q) {
  std::sort(q.begin(), q.end());
  double pos_total = 0.0, neg_total = 0.0;
  for (double p : q) {
    pos_total += p;
    neg_total += 1.0 - p;
  }
  if (pos_total <= 0.0 || neg_total <= 0.0) return 0.5;
  double wins = 0.0, neg_below = 0.0;
  for (std::size_t i = 0; i < q.size();) {
    std::size_t j = i;
    double pos = 0.0, neg = 0.0;
    while (j < q.size() && q[j] == q[i]) {
      pos += q[j];
      neg += 1.0 - q[j];
      ++j;
    }
    wins += pos * (neg_below + 0.5 * neg);
    neg_below += neg;
    i = j;
  }
  return wins / (pos_total * neg_total);
}

}  // namespace

std::string_view synth_rule_name(SynthRule rule) {
  switch (rule) {
    case SynthRule::kEqual:
      return "equal";
    case SynthRule::kXor:
      return "xor";
    case SynthRule::kPairwise:
      return "pairwise";
    case SynthRule::kNoise:
      return "noise";
  }
  return "unknown";
}

SynthRule parse_synth_rule(std::string_view text) {
  for (SynthRule rule : {SynthRule::kEqual, SynthRule::kXor,
                         SynthRule::kPairwise, SynthRule::kNoise}) {
    if (synth_rule_name(rule) == text) return rule;
  }
  throw ConfigError("unknown synthetic rule '" + std::string(text) +
                    "' (expected equal, xor, pairwise or noise)");
}

void SynthSpec::validate() const {
  if (cardinalities.size() < 2) {
    throw ValueError("synthetic data needs at least 2 fields");
  }
  for (std::size_t c : cardinalities) {
    if (c < 2) {
      throw ValueError("degenerate cardinality " + std::to_string(c) +
                       ": every field needs at least 2 values");
    }
  }
  if (rows == 0) throw ValueError("synthetic data needs at least 1 row");
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw ValueError("noise must be a finite non-negative value");
  }
  if (rule == SynthRule::kXor &&
      (cardinalities[0] % 2 != 0 || cardinalities[1] % 2 != 0)) {
    throw ValueError("xor rule needs even cardinalities on fields 0 and 1");
  }
}

SynthData synth(const SynthSpec& spec) {
  const Generator gen(spec);
  const std::size_t f = spec.cardinalities.size();
  SynthData out;
  std::vector<FieldSpec> fields;
  for (std::size_t i = 0; i < f; ++i) {
    fields.push_back({"f" + std::to_string(i), FieldKind::kCategorical});
  }
  out.schema = FeatureSchema(std::move(fields));

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::size_t> v(f);
  out.records.reserve(spec.rows);
  out.posterior.reserve(spec.rows);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    RawRecord record;
    for (std::size_t i = 0; i < f; ++i) {
      v[i] = static_cast<std::size_t>(rng() % spec.cardinalities[i]);
      record.categorical.push_back("v" + std::to_string(v[i]));
    }
    const double z = normal(rng);
    if (spec.rule == SynthRule::kNoise) {
      record.label = z > 0.0 ? 1 : 0;
    } else {
      record.label = gen.score(v) + spec.noise * z > 0.0 ? 1 : 0;
    }
    out.posterior.push_back(gen.posterior(v));
    out.records.push_back(std::move(record));
  }
  out.bayes_auc = bayes_auc(spec);
  return out;
}

double bayes_auc(const SynthSpec& spec) {
  const Generator gen(spec);
  const std::size_t read = gen.read_fields();
  if (read == 0) return 0.5;
  std::size_t cells = 1;
  bool enumerable = true;
  for (std::size_t i = 0; i < read; ++i) {
    if (cells > kMaxEnumeratedCells / spec.cardinalities[i]) {
      enumerable = false;
      break;
    }
    cells *= spec.cardinalities[i];
  }
  std::vector<std::size_t> v(spec.cardinalities.size(), 0);
  std::vector<double> q;
  if (enumerable) {
    q.reserve(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      std::size_t rest = c;
      for (std::size_t i = read; i-- > 0;) {
        v[i] = rest % spec.cardinalities[i];
        rest /= spec.cardinalities[i];
      }
      q.push_back(gen.posterior(v));
    }
  } else {
    std::mt19937_64 rng(spec.seed + 1);
    q.reserve(kSampledCells);
    for (std::size_t c = 0; c < kSampledCells; ++c) {
      for (std::size_t i = 0; i < read; ++i) {
        v[i] = static_cast<std::size_t>(rng() % spec.cardinalities[i]);
      }
      q.push_back(gen.posterior(v));
    }
  }
  return weighted_auc(std::move(q));
}

double calibrate_noise(SynthSpec spec, double target) {
  spec.noise = 0.0;
  const double ceiling = bayes_auc(spec);
  if (!(target > 0.5 && target < ceiling)) {
    throw ValueError("target Bayes AUC must lie in (0.5, " +
                     std::to_string(ceiling) + ")");
  }
  double lo = 0.0, hi = 1.0;
  spec.noise = hi;
  while (bayes_auc(spec) > target) {
    lo = hi;
    hi *= 2.0;
    spec.noise = hi;
  }
  for (int iter = 0; iter < 200; ++iter) {
    spec.noise = 0.5 * (lo + hi);
    const double value = bayes_auc(spec);
    if (std::abs(value - target) < 1e-6) break;
    (value > target ? lo : hi) = spec.noise;
  }
  return spec.noise;
}

LoadedData split_synth(const SynthData& data, std::uint64_t seed) {
  LoadedData out;
  out.schema = data.schema;
  SplitIndices indices = split_indices(data.records.size(), 0.8, 0.1, seed);
  for (std::size_t i : indices.train) out.train.push_back(data.records[i]);
  for (std::size_t i : indices.valid) out.valid.push_back(data.records[i]);
  for (std::size_t i : indices.test) out.test.push_back(data.records[i]);
  out.indices = std::move(indices);
  return out;
}

}  // namespace stec
