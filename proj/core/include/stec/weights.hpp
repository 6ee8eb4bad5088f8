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

#ifndef STEC_WEIGHTS_HPP_
#define STEC_WEIGHTS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stec/model.hpp"

// Weight file layout, all integers little-endian:
//
//   magic "STECWGT\0" | u32 version | u64 config digest | u32 precision bits
//   str  model config (serialize(ModelConfig))
//   u32  field count, then per field: str name, u8 kind (0 cat, 1 num)
//   u32  parameter count, then per record:
//        str name, u32 rank, u64 extents[rank], raw values (4 or 8 bytes)
//   u32  vocabulary field count, then per field:
//        str field, u32 min_freq, u32 value count, str values...
//   u32  numerical slot count, then f64 min[n], f64 max[n]
//   u32  CRC-32 of every preceding byte
//
// str is a u32 byte length followed by the bytes. BatchNorm running
// statistics are stored as parameter records named "<bn>.running_mean" and
// "<bn>.running_var".
namespace stec {

inline constexpr std::uint32_t kWeightFileVersion = 1;

struct ParamRecord {
  std::string name;
  Shape shape;
  std::vector<double> values;  // widened copy; narrowed again on load
};

struct WeightFile {
  std::uint32_t precision_bits = 64;
  ModelConfig config;
  FeatureSchema schema;
  Vocabulary vocab;
  NumericNormalizer normalizer;
  std::vector<ParamRecord> params;
};

void write_weight_file(const WeightFile& file, const std::filesystem::path& path);
// Throws FormatError on bad magic, version, digest or checksum.
WeightFile read_weight_file(const std::filesystem::path& path);

template <typename T>
WeightFile to_weight_file(const StecModel<T>& model);

// Throws SchemaError when the vocabulary, schema and parameters disagree.
template <typename T>
StecModel<T> from_weight_file(const WeightFile& file);

template <typename T>
void save_weights(const StecModel<T>& model, const std::filesystem::path& path);

template <typename T>
StecModel<T> load_weights(const std::filesystem::path& path);

}  // namespace stec

#endif  // STEC_WEIGHTS_HPP_
