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

#include "stec/embedding.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "stec/ops.hpp"

namespace stec {

FeatureSchema::FeatureSchema(std::vector<FieldSpec> fields)
    : fields_(std::move(fields)) {
  if (fields_.size() < 2) {
    throw SchemaError("schema needs at least 2 feature fields, got " +
                      std::to_string(fields_.size()));
  }
  std::unordered_set<std::string> names;
  std::size_t numerical = 0;
  for (const auto& field : fields_) {
    if (!names.insert(field.name).second) {
      throw SchemaError("duplicate field name '" + field.name + "'");
    }
    if (field.kind == FieldKind::kCategorical) {
      slots_.push_back(num_categorical_++);
    } else {
      slots_.push_back(numerical++);
    }
  }
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].name == name) return i;
  }
  throw SchemaError("unknown field '" + std::string(name) + "'");
}

std::uint32_t FieldVocabulary::lookup(std::string_view value) const {
  auto it = index.find(std::string(value));
  return it == index.end() ? oov() : it->second;
}

Vocabulary::Vocabulary(std::vector<FieldVocabulary> fields)
    : fields_(std::move(fields)) {
  for (auto& field : fields_) {
    field.index.clear();
    for (std::size_t i = 0; i < field.values.size(); ++i) {
      if (!field.index.emplace(field.values[i], static_cast<std::uint32_t>(i))
               .second) {
        throw SchemaError("vocabulary of field '" + field.field +
                          "' lists value '" + field.values[i] + "' twice");
      }
    }
  }
}

std::size_t Vocabulary::total_size() const {
  std::size_t total = 0;
  for (const auto& field : fields_) total += field.size();
  return total;
}

Vocabulary build_vocab(std::span<const RawRecord> rows,
                       const FeatureSchema& schema, std::uint32_t min_freq) {
  if (rows.empty()) throw ValueError("build_vocab: no training rows");
  const std::size_t n_cat = schema.num_categorical();
  std::vector<std::vector<std::string>> order(n_cat);
  std::vector<std::unordered_map<std::string, std::uint32_t>> counts(n_cat);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const RawRecord& row = rows[r];
    if (row.categorical.size() != n_cat) {
      throw SchemaError("record " + std::to_string(r) + " has " +
                        std::to_string(row.categorical.size()) +
                        " categorical values, schema declares " +
                        std::to_string(n_cat));
    }
    for (std::size_t s = 0; s < n_cat; ++s) {
      auto [it, inserted] = counts[s].try_emplace(row.categorical[s], 0);
      if (inserted) order[s].push_back(row.categorical[s]);
      ++it->second;
    }
  }
  std::vector<FieldVocabulary> fields;
  fields.reserve(n_cat);
  for (const auto& spec : schema.fields()) {
    if (spec.kind != FieldKind::kCategorical) continue;
    const std::size_t s = fields.size();
    FieldVocabulary field;
    field.field = spec.name;
    field.min_freq = min_freq;
    for (const auto& value : order[s]) {
      if (counts[s][value] >= min_freq) field.values.push_back(value);
    }
    fields.push_back(std::move(field));
  }
  return Vocabulary(std::move(fields));
}

NumericNormalizer NumericNormalizer::fit(std::span<const RawRecord> rows,
                                         const FeatureSchema& schema) {
  const std::size_t n = schema.num_numerical();
  NumericNormalizer norm;
  norm.min.assign(n, std::numeric_limits<double>::infinity());
  norm.max.assign(n, -std::numeric_limits<double>::infinity());
  for (const auto& row : rows) {
    for (std::size_t s = 0; s < n; ++s) {
      norm.min[s] = std::min(norm.min[s], row.numerical.at(s));
      norm.max[s] = std::max(norm.max[s], row.numerical.at(s));
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (!std::isfinite(norm.min[s])) norm.min[s] = norm.max[s] = 0.0;
  }
  return norm;
}

double NumericNormalizer::apply(std::size_t slot, double value) const {
  const double range = max.at(slot) - min.at(slot);
  if (range <= 0.0) return 0.0;
  return (value - min[slot]) / range;
}

void NumericNormalizer::apply(RawRecord& record) const {
  for (std::size_t s = 0; s < record.numerical.size(); ++s) {
    record.numerical[s] = apply(s, record.numerical[s]);
  }
}

template <typename T>
EmbeddingTable<T>::EmbeddingTable(const FeatureSchema& schema,
                                  const Vocabulary& vocab, std::size_t dim,
                                  std::mt19937_64& rng)
    : dim_(dim) {
  if (dim == 0) throw ValueError("embedding dimension must be positive");
  if (vocab.num_fields() != schema.num_categorical()) {
    throw SchemaError("vocabulary covers " +
                      std::to_string(vocab.num_fields()) +
                      " categorical fields, schema declares " +
                      std::to_string(schema.num_categorical()));
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> init(-bound, bound);
  auto random_tensor = [&](std::size_t rows) {
    std::vector<T> values(rows * dim);
    for (T& v : values) v = static_cast<T>(init(rng));
    return Tensor<T>::from_data({rows, dim}, std::move(values), true);
  };
  for (const auto& field : schema.fields()) {
    if (field.kind == FieldKind::kCategorical) {
      const auto& fv = vocab.field(categorical_.size());
      if (fv.field != field.name) {
        throw SchemaError("vocabulary field '" + fv.field +
                          "' does not match schema field '" + field.name + "'");
      }
      categorical_names_.push_back("embed." + field.name);
      categorical_.push_back(random_tensor(fv.size()));
    } else {
      numerical_names_.push_back("embed." + field.name);
      numerical_.push_back(random_tensor(1));
    }
  }
}

template <typename T>
void EmbeddingTable<T>::collect(
    std::vector<std::pair<std::string, Tensor<T>>>& out) const {
  for (std::size_t i = 0; i < categorical_.size(); ++i) {
    out.emplace_back(categorical_names_[i], categorical_[i]);
  }
  for (std::size_t i = 0; i < numerical_.size(); ++i) {
    out.emplace_back(numerical_names_[i], numerical_[i]);
  }
}

template <typename T>
Tensor<T> embed_batch(const Batch& batch, const FeatureSchema& schema,
                      const EmbeddingTable<T>& tables) {
  const std::size_t rows = batch.size;
  const std::size_t n_cat = schema.num_categorical();
  const std::size_t n_num = schema.num_numerical();
  if (rows == 0) throw ValueError("embed_batch: empty batch");
  if (batch.categorical.size() != rows * n_cat ||
      batch.numerical.size() != rows * n_num) {
    throw SchemaError("batch layout does not match schema with " +
                      std::to_string(n_cat) + " categorical and " +
                      std::to_string(n_num) + " numerical fields");
  }
  const std::size_t d = tables.dim();
  std::vector<Tensor<T>> slots;
  slots.reserve(schema.num_fields());
  std::vector<std::uint32_t> column(rows);
  for (std::size_t f = 0; f < schema.num_fields(); ++f) {
    const std::size_t slot = schema.slot(f);
    Tensor<T> field_embedding;
    if (schema.fields()[f].kind == FieldKind::kCategorical) {
      for (std::size_t r = 0; r < rows; ++r) {
        column[r] = batch.categorical[r * n_cat + slot];
      }
      field_embedding = ops::gather_rows(tables.categorical(slot), column);
    } else {
      std::vector<T> values(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const double v = batch.numerical[r * n_num + slot];
        if (!std::isfinite(v)) {
          throw NonFiniteError("numerical field '" + schema.fields()[f].name +
                               "' has non-finite value in batch row " +
                               std::to_string(r));
        }
        values[r] = static_cast<T>(v);
      }
      auto scalars = Tensor<T>::from_data({rows, 1}, std::move(values));
      field_embedding = ops::matmul(scalars, tables.numerical(slot));
    }
    slots.push_back(ops::reshape(field_embedding, {rows, 1, d}));
  }
  return ops::concat(slots, 1);
}

template class EmbeddingTable<float>;
template class EmbeddingTable<double>;
template Tensor<float> embed_batch(const Batch&, const FeatureSchema&,
                                   const EmbeddingTable<float>&);
template Tensor<double> embed_batch(const Batch&, const FeatureSchema&,
                                    const EmbeddingTable<double>&);

}  // namespace stec
