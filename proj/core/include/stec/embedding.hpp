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

#ifndef STEC_EMBEDDING_HPP_
#define STEC_EMBEDDING_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stec/tensor.hpp"

namespace stec {

enum class FieldKind { kCategorical, kNumerical };

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::kCategorical;

  bool operator==(const FieldSpec&) const = default;
};

// Ordered input fields. Each field also has a slot: its position among the
// fields of the same kind, which is how records and batches store values.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  // Throws SchemaError on duplicate names or fewer than two fields.
  explicit FeatureSchema(std::vector<FieldSpec> fields);

  const std::vector<FieldSpec>& fields() const { return fields_; }
  std::size_t num_fields() const { return fields_.size(); }
  std::size_t num_categorical() const { return num_categorical_; }
  std::size_t num_numerical() const { return fields_.size() - num_categorical_; }
  std::size_t slot(std::size_t field) const { return slots_.at(field); }
  std::size_t index_of(std::string_view name) const;

  bool operator==(const FeatureSchema& other) const {
    return fields_ == other.fields_;
  }

 private:
  std::vector<FieldSpec> fields_;
  std::vector<std::size_t> slots_;
  std::size_t num_categorical_ = 0;
};

// One raw instance. Values are stored per kind in slot order.
struct RawRecord {
  std::vector<std::string> categorical;
  std::vector<double> numerical;
  int label = 0;

  bool operator==(const RawRecord&) const = default;
};

struct FieldVocabulary {
  std::string field;
  std::uint32_t min_freq = 1;
  std::vector<std::string> values;  // index -> value, first-seen order
  std::unordered_map<std::string, std::uint32_t> index;

  std::uint32_t oov() const { return static_cast<std::uint32_t>(values.size()); }
  // Table rows including the OOV row.
  std::size_t size() const { return values.size() + 1; }
  std::uint32_t lookup(std::string_view value) const;
};

// Value-to-row maps for every categorical field.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<FieldVocabulary> fields);

  const std::vector<FieldVocabulary>& fields() const { return fields_; }
  std::size_t num_fields() const { return fields_.size(); }
  const FieldVocabulary& field(std::size_t slot) const { return fields_.at(slot); }
  // Sum of table sizes over fields, OOV rows included.
  std::size_t total_size() const;

 private:
  std::vector<FieldVocabulary> fields_;
};

// Builds one vocabulary per categorical field from training rows. Values
// seen fewer than `min_freq` times share the field's OOV row.
Vocabulary build_vocab(std::span<const RawRecord> rows,
                       const FeatureSchema& schema, std::uint32_t min_freq);

// Min-max scaling of numerical slots, fitted on training rows only.
struct NumericNormalizer {
  std::vector<double> min;
  std::vector<double> max;

  static NumericNormalizer fit(std::span<const RawRecord> rows,
                               const FeatureSchema& schema);
  double apply(std::size_t slot, double value) const;
  void apply(RawRecord& record) const;
};

// Encoded minibatch. Immutable once handed to the model.
struct Batch {
  std::size_t size = 0;
  std::vector<std::uint32_t> categorical;  // [size x num_categorical]
  std::vector<double> numerical;           // [size x num_numerical]
  std::vector<std::uint8_t> labels;        // [size]
};

// Per-field embedding parameters: a [rows x d] table for every categorical
// field and a [1 x d] vector for every numerical one.
template <typename T>
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // Uniform(-1/sqrt(d), 1/sqrt(d)) initialization.
  EmbeddingTable(const FeatureSchema& schema, const Vocabulary& vocab,
                 std::size_t dim, std::mt19937_64& rng);

  std::size_t dim() const { return dim_; }
  const Tensor<T>& categorical(std::size_t slot) const {
    return categorical_.at(slot);
  }
  const Tensor<T>& numerical(std::size_t slot) const {
    return numerical_.at(slot);
  }

  void collect(std::vector<std::pair<std::string, Tensor<T>>>& out) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> categorical_names_;
  std::vector<std::string> numerical_names_;
  std::vector<Tensor<T>> categorical_;
  std::vector<Tensor<T>> numerical_;
};

// Stacks per-field embeddings into x[B, f, d] in schema order.
template <typename T>
Tensor<T> embed_batch(const Batch& batch, const FeatureSchema& schema,
                      const EmbeddingTable<T>& tables);

extern template class EmbeddingTable<float>;
extern template class EmbeddingTable<double>;

}  // namespace stec

#endif  // STEC_EMBEDDING_HPP_
