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

#include "stec/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace stec {

namespace {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

ColumnKind parse_column_kind(std::string_view text, std::size_t line) {
  if (text == "label") return ColumnKind::kLabel;
  if (text == "categorical") return ColumnKind::kCategorical;
  if (text == "numerical") return ColumnKind::kNumerical;
  if (text == "ignore") return ColumnKind::kIgnore;
  throw DataError("schema line " + std::to_string(line) +
                  ": unknown column kind '" + std::string(text) + "'");
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto result = std::from_chars(text.data(), text.data() + text.size(), out);
  return result.ec == std::errc() && result.ptr == text.data() + text.size() &&
         std::isfinite(out);
}

std::string log_bucket(double value) {
  if (value > 2.0) {
    const double l = std::log(value);
    return std::to_string(static_cast<long long>(std::floor(l * l)));
  }
  return std::to_string(static_cast<long long>(std::floor(value)));
}

// Stateful row parser shared by the in-memory and streaming paths.
class RowParser {
 public:
  RowParser(const DatasetSpec& spec, const std::filesystem::path& path)
      : spec_(spec), path_(path.string()) {}

  // Returns false for rows that carry no data (blank lines, header).
  bool parse(std::string_view line, std::size_t line_no, RawRecord& out) const {
    line = trim_line(line);
    if (line.empty()) return false;
    if (spec_.header && line_no == 1) return false;
    const auto cells = split(line, spec_.delimiter);
    if (cells.size() != spec_.columns.size()) {
      fail(line_no, "expected " + std::to_string(spec_.columns.size()) +
                        " columns, found " + std::to_string(cells.size()));
    }
    out.categorical.clear();
    out.numerical.clear();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const ColumnSpec& column = spec_.columns[c];
      switch (column.kind) {
        case ColumnKind::kIgnore:
          break;
        case ColumnKind::kLabel: {
          double value = 0.0;
          if (!parse_double(cells[c], value) || (value != 0.0 && value != 1.0)) {
            fail(line_no, "label '" + std::string(cells[c]) +
                              "' is not binary (0 or 1)");
          }
          out.label = value == 1.0 ? 1 : 0;
          break;
        }
        case ColumnKind::kCategorical:
          out.categorical.emplace_back(trim(cells[c]));
          break;
        case ColumnKind::kNumerical: {
          double value = 0.0;
          const bool ok = parse_double(cells[c], value);
          if (spec_.numeric_mode == NumericMode::kLogBucket) {
            out.categorical.push_back(ok ? log_bucket(value) : std::string());
          } else {
            if (!ok) {
              fail(line_no, "column '" + column.name + "': '" +
                                std::string(cells[c]) + "' is not a finite number");
            }
            out.numerical.push_back(value);
          }
          break;
        }
      }
    }
    return true;
  }

 private:
  static std::string_view trim_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
      line.remove_suffix(1);
    }
    return trim(line).empty() ? std::string_view{} : line;
  }

  [[noreturn]] void fail(std::size_t line_no, const std::string& what) const {
    throw DataError(path_ + ":" + std::to_string(line_no) + ": " + what);
  }

  const DatasetSpec& spec_;
  std::string path_;
};

void for_each_record(const std::filesystem::path& path, const DatasetSpec& spec,
                     const std::function<void(RawRecord&)>& visit) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path.string() + "'");
  RowParser parser(spec, path);
  std::string line;
  std::size_t line_no = 0;
  RawRecord record;
  while (std::getline(in, line)) {
    ++line_no;
    if (parser.parse(line, line_no, record)) visit(record);
  }
}

void encode_into(const RawRecord& record, const FeatureSchema& schema,
                 const Vocabulary& vocab, const NumericNormalizer& normalizer,
                 EncodedSet& out) {
  if (record.categorical.size() != schema.num_categorical() ||
      record.numerical.size() != schema.num_numerical()) {
    throw SchemaError("record does not match the schema's field counts");
  }
  for (std::size_t s = 0; s < record.categorical.size(); ++s) {
    out.categorical.push_back(vocab.field(s).lookup(record.categorical[s]));
  }
  for (std::size_t s = 0; s < record.numerical.size(); ++s) {
    out.numerical.push_back(normalizer.apply(s, record.numerical[s]));
  }
  out.labels.push_back(static_cast<std::uint8_t>(record.label));
}

EncodedSet empty_set(const FeatureSchema& schema) {
  EncodedSet set;
  set.num_categorical = schema.num_categorical();
  set.num_numerical = schema.num_numerical();
  return set;
}

DatasetSummary summarize(const FeatureSchema& schema, const Vocabulary& vocab,
                         std::size_t instances) {
  DatasetSummary summary;
  summary.instances = instances;
  summary.fields = schema.num_fields();
  for (const auto& field : vocab.fields()) summary.features += field.values.size();
  summary.features += schema.num_numerical();
  return summary;
}

}  // namespace

std::vector<ColumnSpec> parse_schema(std::string_view text) {
  std::vector<ColumnSpec> columns;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields{std::string(body)};
    std::string name, kind, extra;
    fields >> name >> kind;
    if (kind.empty() || (fields >> extra)) {
      throw DataError("schema line " + std::to_string(line_no) +
                      ": expected 'name kind'");
    }
    columns.push_back({name, parse_column_kind(kind, line_no)});
  }
  return columns;
}

std::vector<ColumnSpec> read_schema_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_schema(text.str());
}

std::string_view numeric_mode_name(NumericMode mode) {
  return mode == NumericMode::kMinMax ? "minmax" : "log_bucket";
}

NumericMode parse_numeric_mode(std::string_view text) {
  if (text == "minmax") return NumericMode::kMinMax;
  if (text == "log_bucket") return NumericMode::kLogBucket;
  throw ConfigError("unknown numeric mode '" + std::string(text) +
                    "' (expected minmax or log_bucket)");
}

void DatasetSpec::validate() const {
  std::size_t labels = 0;
  for (const auto& column : columns) labels += column.kind == ColumnKind::kLabel;
  if (labels != 1) {
    throw ConfigError("dataset schema needs exactly one label column, found " +
                      std::to_string(labels));
  }
  auto require = [](const std::filesystem::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("dataset ") + what + " is not set");
    if (!std::filesystem::is_regular_file(p)) {
      throw ConfigError(std::string("dataset ") + what + " '" + p.string() +
                        "' does not exist");
    }
  };
  if (pre_split()) {
    require(train_path, "train file");
    require(valid_path, "valid file");
    require(test_path, "test file");
  } else {
    require(path, "file");
    if (!(train_ratio > 0 && valid_ratio > 0 && test_ratio > 0) ||
        std::abs(train_ratio + valid_ratio + test_ratio - 1.0) > 1e-9) {
      throw ConfigError("split ratios must be positive and sum to 1");
    }
  }
  schema();
}

FeatureSchema DatasetSpec::schema() const {
  std::vector<FieldSpec> fields;
  for (const auto& column : columns) {
    if (column.kind == ColumnKind::kCategorical) {
      fields.push_back({column.name, FieldKind::kCategorical});
    } else if (column.kind == ColumnKind::kNumerical) {
      fields.push_back({column.name, numeric_mode == NumericMode::kLogBucket
                                         ? FieldKind::kCategorical
                                         : FieldKind::kNumerical});
    }
  }
  return FeatureSchema(std::move(fields));
}

std::vector<RawRecord> read_records(const std::filesystem::path& path,
                                    const DatasetSpec& spec) {
  std::vector<RawRecord> records;
  for_each_record(path, spec, [&](RawRecord& r) { records.push_back(r); });
  return records;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with explicit draws: std::shuffle's use of the engine is
  // implementation-defined, this is reproducible across standard libraries.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

SplitIndices split_indices(std::size_t n, double train_ratio,
                           double valid_ratio, std::uint64_t seed) {
  const std::vector<std::size_t> order = permutation(n, seed);
  const auto n_train = static_cast<std::size_t>(std::llround(train_ratio * n));
  const auto n_valid = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(valid_ratio * n)));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.valid.assign(order.begin() + n_train, order.begin() + n_train + n_valid);
  out.test.assign(order.begin() + n_train + n_valid, order.end());
  return out;
}

LoadedData load(const DatasetSpec& spec) {
  spec.validate();
  LoadedData data;
  data.schema = spec.schema();
  if (spec.pre_split()) {
    data.train = read_records(spec.train_path, spec);
    data.valid = read_records(spec.valid_path, spec);
    data.test = read_records(spec.test_path, spec);
  } else {
    const std::vector<RawRecord> all = read_records(spec.path, spec);
    SplitIndices indices =
        split_indices(all.size(), spec.train_ratio, spec.valid_ratio, spec.seed);
    for (std::size_t i : indices.train) data.train.push_back(all[i]);
    for (std::size_t i : indices.valid) data.valid.push_back(all[i]);
    for (std::size_t i : indices.test) data.test.push_back(all[i]);
    data.indices = std::move(indices);
  }
  if (data.train.empty()) throw DataError("training split is empty");
  return data;
}

Batch EncodedSet::gather(std::span<const std::size_t> rows) const {
  Batch batch;
  batch.size = rows.size();
  batch.categorical.reserve(rows.size() * num_categorical);
  batch.numerical.reserve(rows.size() * num_numerical);
  batch.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= size()) throw ValueError("row index out of range");
    batch.categorical.insert(batch.categorical.end(),
                             categorical.begin() + r * num_categorical,
                             categorical.begin() + (r + 1) * num_categorical);
    batch.numerical.insert(batch.numerical.end(),
                           numerical.begin() + r * num_numerical,
                           numerical.begin() + (r + 1) * num_numerical);
    batch.labels.push_back(labels[r]);
  }
  return batch;
}

Batch EncodedSet::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw ValueError("slice out of range");
  std::vector<std::size_t> rows(end - begin);
  std::iota(rows.begin(), rows.end(), begin);
  return gather(rows);
}

EncodedSet encode(std::span<const RawRecord> records,
                  const FeatureSchema& schema, const Vocabulary& vocab,
                  const NumericNormalizer& normalizer) {
  EncodedSet set = empty_set(schema);
  for (const auto& record : records) {
    encode_into(record, schema, vocab, normalizer, set);
  }
  return set;
}

PreparedData prepare(const LoadedData& data, std::uint32_t min_freq) {
  PreparedData out;
  out.schema = data.schema;
  out.vocab = build_vocab(data.train, data.schema, min_freq);
  out.normalizer = NumericNormalizer::fit(data.train, data.schema);
  out.train = encode(data.train, out.schema, out.vocab, out.normalizer);
  out.valid = encode(data.valid, out.schema, out.vocab, out.normalizer);
  out.test = encode(data.test, out.schema, out.vocab, out.normalizer);
  out.summary = summarize(out.schema, out.vocab,
                          data.train.size() + data.valid.size() + data.test.size());
  out.split = data.indices;
  return out;
}

PreparedData prepare_streaming(const DatasetSpec& spec) {
  spec.validate();
  if (!spec.pre_split()) {
    throw ConfigError("streaming preparation needs pre-split train/valid/test files");
  }
  PreparedData out;
  out.schema = spec.schema();
  const std::size_t n_cat = out.schema.num_categorical();
  const std::size_t n_num = out.schema.num_numerical();

  // Pass one: value counts and numeric ranges from the training file.
  std::vector<std::vector<std::string>> order(n_cat);
  std::vector<std::unordered_map<std::string, std::uint32_t>> counts(n_cat);
  out.normalizer.min.assign(n_num, std::numeric_limits<double>::infinity());
  out.normalizer.max.assign(n_num, -std::numeric_limits<double>::infinity());
  std::size_t train_rows = 0;
  for_each_record(spec.train_path, spec, [&](RawRecord& r) {
    ++train_rows;
    for (std::size_t s = 0; s < n_cat; ++s) {
      auto [it, inserted] = counts[s].try_emplace(r.categorical[s], 0);
      if (inserted) order[s].push_back(r.categorical[s]);
      ++it->second;
    }
    for (std::size_t s = 0; s < n_num; ++s) {
      out.normalizer.min[s] = std::min(out.normalizer.min[s], r.numerical[s]);
      out.normalizer.max[s] = std::max(out.normalizer.max[s], r.numerical[s]);
    }
  });
  if (train_rows == 0) throw DataError("training split is empty");
  std::vector<FieldVocabulary> fields;
  for (const auto& field : out.schema.fields()) {
    if (field.kind != FieldKind::kCategorical) continue;
    const std::size_t s = fields.size();
    FieldVocabulary vocab;
    vocab.field = field.name;
    vocab.min_freq = spec.min_freq;
    for (const auto& value : order[s]) {
      if (counts[s][value] >= spec.min_freq) vocab.values.push_back(value);
    }
    fields.push_back(std::move(vocab));
  }
  out.vocab = Vocabulary(std::move(fields));

  // Pass two: encode row by row without keeping raw records.
  auto encode_file = [&](const std::filesystem::path& path) {
    EncodedSet set = empty_set(out.schema);
    for_each_record(path, spec, [&](RawRecord& r) {
      encode_into(r, out.schema, out.vocab, out.normalizer, set);
    });
    return set;
  };
  out.train = encode_file(spec.train_path);
  out.valid = encode_file(spec.valid_path);
  out.test = encode_file(spec.test_path);
  out.summary = summarize(out.schema, out.vocab,
                          out.train.size() + out.valid.size() + out.test.size());
  return out;
}

BatchStream::BatchStream(const EncodedSet& set, std::size_t batch_size,
                         std::optional<std::uint64_t> shuffle_seed)
    : set_(&set), batch_size_(batch_size) {
  if (batch_size < 1) throw ValueError("batch size must be at least 1");
  if (shuffle_seed) {
    order_ = permutation(set.size(), *shuffle_seed);
  } else {
    order_.resize(set.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }
}

bool BatchStream::next(Batch& out) {
  if (cursor_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
  out = set_->gather(std::span<const std::size_t>(order_).subspan(cursor_, end - cursor_));
  cursor_ = end;
  return true;
}

std::size_t BatchStream::num_batches() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

std::vector<Batch> batches(const EncodedSet& set, std::size_t batch_size,
                           std::optional<std::uint64_t> shuffle_seed) {
  BatchStream stream(set, batch_size, shuffle_seed);
  std::vector<Batch> out;
  Batch batch;
  while (stream.next(batch)) out.push_back(std::move(batch));
  return out;
}

}  // namespace stec
