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

#ifndef STEC_DATA_HPP_
#define STEC_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stec/embedding.hpp"

// Delimited-text ingestion, splitting, encoding and minibatch streaming.
namespace stec {

enum class ColumnKind { kLabel, kCategorical, kNumerical, kIgnore };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kCategorical;

  bool operator==(const ColumnSpec&) const = default;
};

// Schema text: one "name kind" line per column, kind in {label, categorical,
// numerical, ignore}. Blank lines and lines starting with '#' are skipped.
std::vector<ColumnSpec> parse_schema(std::string_view text);
std::vector<ColumnSpec> read_schema_file(const std::filesystem::path& path);

// How numerical columns enter the model.
//   kMinMax:    scaled to [0, 1] with training-split min/max.
//   kLogBucket: turned into categorical tokens, floor(ln(v)^2) for v > 2
//               and the integer value otherwise.
enum class NumericMode { kMinMax, kLogBucket };

std::string_view numeric_mode_name(NumericMode mode);
NumericMode parse_numeric_mode(std::string_view text);

struct DatasetSpec {
  // Either one file split by ratios, or three pre-split files.
  std::filesystem::path path;
  std::filesystem::path train_path;
  std::filesystem::path valid_path;
  std::filesystem::path test_path;
  char delimiter = ',';
  bool header = false;
  std::vector<ColumnSpec> columns;
  double train_ratio = 0.8;
  double valid_ratio = 0.1;
  double test_ratio = 0.1;
  std::uint64_t seed = 0;
  std::uint32_t min_freq = 1;
  NumericMode numeric_mode = NumericMode::kMinMax;

  bool pre_split() const { return !train_path.empty(); }
  // Throws ConfigError: exactly one label column, ratios positive and
  // summing to 1, one of the two path layouts, referenced files present.
  void validate() const;
  // Model-facing fields: every non-label, non-ignored column in file order.
  FeatureSchema schema() const;
};

// Parses every data row of `path`. Throws DataError naming the line on a
// wrong column count, an unparsable number or a non-binary label.
std::vector<RawRecord> read_records(const std::filesystem::path& path,
                                    const DatasetSpec& spec);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<std::size_t> test;
};

// Seeded partition of [0, n): a shuffled permutation cut at the ratios.
SplitIndices split_indices(std::size_t n, double train_ratio,
                           double valid_ratio, std::uint64_t seed);

struct LoadedData {
  FeatureSchema schema;
  std::vector<RawRecord> train;
  std::vector<RawRecord> valid;
  std::vector<RawRecord> test;
  std::optional<SplitIndices> indices;  // set for ratio splits
};

LoadedData load(const DatasetSpec& spec);

// Dense encoded records, row-major per kind.
struct EncodedSet {
  std::size_t num_categorical = 0;
  std::size_t num_numerical = 0;
  std::vector<std::uint32_t> categorical;
  std::vector<double> numerical;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  Batch gather(std::span<const std::size_t> rows) const;
  Batch slice(std::size_t begin, std::size_t end) const;
};

// Vocabulary lookup (OOV for unseen values) and numeric normalization.
EncodedSet encode(std::span<const RawRecord> records,
                  const FeatureSchema& schema, const Vocabulary& vocab,
                  const NumericNormalizer& normalizer);

struct DatasetSummary {
  std::size_t instances = 0;
  std::size_t fields = 0;
  std::size_t features = 0;  // distinct categorical values + numerical fields
};

struct PreparedData {
  FeatureSchema schema;
  Vocabulary vocab;
  NumericNormalizer normalizer;
  EncodedSet train;
  EncodedSet valid;
  EncodedSet test;
  DatasetSummary summary;
  std::optional<SplitIndices> split;  // record indices of a ratio split
};

// Vocabulary and normalizer are fitted on the training split only.
PreparedData prepare(const LoadedData& data, std::uint32_t min_freq);

// Two-pass path for files too large to hold as raw records: pass one builds
// the vocabulary and normalizer from the training file, pass two encodes
// each file row by row. Requires a pre-split spec.
PreparedData prepare_streaming(const DatasetSpec& spec);

// Seeded permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

// One pass over an encoded set in minibatches. Every record is visited
// exactly once; the last batch may be short.
class BatchStream {
 public:
  // Throws ValueError when batch_size < 1. Without a seed, records are
  // visited in storage order.
  BatchStream(const EncodedSet& set, std::size_t batch_size,
              std::optional<std::uint64_t> shuffle_seed = std::nullopt);

  bool next(Batch& out);
  std::size_t num_batches() const;
  const std::vector<std::size_t>& order() const { return order_; }

 private:
  const EncodedSet* set_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Whole-pass convenience wrapper over BatchStream.
std::vector<Batch> batches(const EncodedSet& set, std::size_t batch_size,
                           std::optional<std::uint64_t> shuffle_seed);

}  // namespace stec

#endif  // STEC_DATA_HPP_
