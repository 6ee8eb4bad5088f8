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

#include "stec/weights.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace stec {

namespace {

constexpr char kMagic[8] = {'S', 'T', 'E', 'C', 'W', 'G', 'T', '\0'};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.append(s);
  }
  void raw(const char* data, std::size_t n) { bytes_.append(data, n); }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::size_t end)
      : bytes_(bytes), end_(end) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void expect(const char* data, std::size_t n) {
    need(n);
    if (std::memcmp(bytes_.data() + pos_, data, n) != 0) {
      throw FormatError("not a weight file (bad magic)");
    }
    pos_ += n;
  }
  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw FormatError("weight file is truncated");
  }

  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc(const std::string& bytes, std::size_t n) {
  uLong value = crc32(0L, Z_NULL, 0);
  value = crc32(value, reinterpret_cast<const Bytef*>(bytes.data()),
                static_cast<uInt>(n));
  return static_cast<std::uint32_t>(value);
}

}  // namespace

void write_weight_file(const WeightFile& file,
                       const std::filesystem::path& path) {
  if (file.precision_bits != 32 && file.precision_bits != 64) {
    throw FormatError("precision must be 32 or 64 bits");
  }
  ByteWriter out;
  out.raw(kMagic, sizeof kMagic);
  out.u32(kWeightFileVersion);
  const std::string config_text = serialize(file.config);
  out.u64(fnv1a64(config_text));
  out.u32(file.precision_bits);
  out.str(config_text);

  out.u32(static_cast<std::uint32_t>(file.schema.num_fields()));
  for (const auto& field : file.schema.fields()) {
    out.str(field.name);
    out.u8(field.kind == FieldKind::kCategorical ? 0 : 1);
  }

  out.u32(static_cast<std::uint32_t>(file.params.size()));
  for (const auto& rec : file.params) {
    out.str(rec.name);
    out.u32(static_cast<std::uint32_t>(rec.shape.size()));
    for (std::size_t extent : rec.shape) out.u64(extent);
    if (numel(rec.shape) != rec.values.size()) {
      throw FormatError("parameter '" + rec.name + "' has inconsistent shape");
    }
    for (double v : rec.values) {
      if (file.precision_bits == 32) {
        out.f32(static_cast<float>(v));
      } else {
        out.f64(v);
      }
    }
  }

  out.u32(static_cast<std::uint32_t>(file.vocab.num_fields()));
  for (const auto& field : file.vocab.fields()) {
    out.str(field.field);
    out.u32(field.min_freq);
    out.u32(static_cast<std::uint32_t>(field.values.size()));
    for (const auto& value : field.values) out.str(value);
  }

  out.u32(static_cast<std::uint32_t>(file.normalizer.min.size()));
  for (double v : file.normalizer.min) out.f64(v);
  for (double v : file.normalizer.max) out.f64(v);

  std::string bytes = out.bytes();
  ByteWriter trailer;
  trailer.u32(crc(bytes, bytes.size()));
  bytes += trailer.bytes();

  // Write-then-rename so a crash never leaves a partial file at `path`.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream stream(tmp, std::ios::binary | std::ios::trunc);
    if (!stream) throw Error("cannot open '" + tmp.string() + "' for writing");
    stream.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!stream) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

WeightFile read_weight_file(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) throw FormatError("cannot open weight file '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(stream)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof kMagic + 4) {
    throw FormatError("weight file is truncated");
  }
  const std::size_t body = bytes.size() - 4;
  {
    ByteReader tail(bytes.substr(body), 4);
    const std::uint32_t stored = tail.u32();
    if (stored != crc(bytes, body)) {
      throw FormatError("weight file checksum mismatch (corrupt or truncated)");
    }
  }
  ByteReader in(bytes, body);
  in.expect(kMagic, sizeof kMagic);
  const std::uint32_t version = in.u32();
  if (version != kWeightFileVersion) {
    throw FormatError("unsupported weight file version " +
                      std::to_string(version) + " (expected " +
                      std::to_string(kWeightFileVersion) + ")");
  }
  WeightFile file;
  const std::uint64_t digest = in.u64();
  file.precision_bits = in.u32();
  if (file.precision_bits != 32 && file.precision_bits != 64) {
    throw FormatError("unsupported precision " +
                      std::to_string(file.precision_bits));
  }
  const std::string config_text = in.str();
  if (fnv1a64(config_text) != digest) {
    throw FormatError("config digest mismatch");
  }
  file.config = parse_model_config(config_text);

  std::vector<FieldSpec> fields(in.u32());
  for (auto& field : fields) {
    field.name = in.str();
    field.kind = in.u8() == 0 ? FieldKind::kCategorical : FieldKind::kNumerical;
  }
  file.schema = FeatureSchema(std::move(fields));

  file.params.resize(in.u32());
  for (auto& rec : file.params) {
    rec.name = in.str();
    rec.shape.resize(in.u32());
    for (auto& extent : rec.shape) extent = in.u64();
    rec.values.resize(numel(rec.shape));
    for (double& v : rec.values) {
      v = file.precision_bits == 32 ? static_cast<double>(in.f32()) : in.f64();
    }
  }

  std::vector<FieldVocabulary> vocab(in.u32());
  for (auto& field : vocab) {
    field.field = in.str();
    field.min_freq = in.u32();
    field.values.resize(in.u32());
    for (auto& value : field.values) value = in.str();
  }
  file.vocab = Vocabulary(std::move(vocab));

  const std::uint32_t n_num = in.u32();
  file.normalizer.min.resize(n_num);
  file.normalizer.max.resize(n_num);
  for (double& v : file.normalizer.min) v = in.f64();
  for (double& v : file.normalizer.max) v = in.f64();
  if (!in.done()) throw FormatError("trailing bytes after weight file payload");
  return file;
}

template <typename T>
WeightFile to_weight_file(const StecModel<T>& model) {
  WeightFile file;
  file.precision_bits = sizeof(T) * 8;
  file.config = model.config();
  file.schema = model.schema();
  file.vocab = model.vocab();
  file.normalizer = model.normalizer();
  for (const auto& [name, tensor] : model.parameters()) {
    file.params.push_back(
        {name, tensor.shape(),
         std::vector<double>(tensor.data().begin(), tensor.data().end())});
  }
  for (const auto& norm : model.level_norms()) {
    const std::string prefix = "bn" + std::to_string(norm.level);
    const Shape shape{norm.stats.running_mean.size()};
    file.params.push_back({prefix + ".running_mean", shape,
                           std::vector<double>(norm.stats.running_mean.begin(),
                                               norm.stats.running_mean.end())});
    file.params.push_back({prefix + ".running_var", shape,
                           std::vector<double>(norm.stats.running_var.begin(),
                                               norm.stats.running_var.end())});
  }
  return file;
}

template <typename T>
StecModel<T> from_weight_file(const WeightFile& file) {
  if (file.precision_bits != sizeof(T) * 8) {
    throw FormatError("weight file stores " +
                      std::to_string(file.precision_bits) +
                      "-bit values, requested " +
                      std::to_string(sizeof(T) * 8) + "-bit model");
  }
  if (file.vocab.num_fields() != file.schema.num_categorical()) {
    throw SchemaError("schema mismatch: vocabulary covers " +
                      std::to_string(file.vocab.num_fields()) +
                      " categorical fields, model declares " +
                      std::to_string(file.schema.num_categorical()));
  }
  if (file.normalizer.min.size() != file.schema.num_numerical()) {
    throw SchemaError("schema mismatch: normalizer covers " +
                      std::to_string(file.normalizer.min.size()) +
                      " numerical fields, model declares " +
                      std::to_string(file.schema.num_numerical()));
  }
  StecModel<T> model(file.config, file.schema, file.vocab, file.normalizer);
  std::map<std::string, const ParamRecord*> records;
  for (const auto& rec : file.params) records.emplace(rec.name, &rec);
  auto take = [&](const std::string& name, const Shape& shape) {
    auto it = records.find(name);
    if (it == records.end()) {
      throw SchemaError("schema mismatch: weight file has no parameter '" +
                        name + "'");
    }
    if (it->second->shape != shape) {
      throw SchemaError("schema mismatch: parameter '" + name + "' stored as " +
                        to_string(it->second->shape) + ", model expects " +
                        to_string(shape));
    }
    const ParamRecord* rec = it->second;
    records.erase(it);
    return rec;
  };
  for (auto [name, tensor] : model.parameters()) {
    const ParamRecord* rec = take(name, tensor.shape());
    auto dst = tensor.mutable_data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = static_cast<T>(rec->values[i]);
    }
  }
  for (auto& norm : model.level_norms()) {
    const std::string prefix = "bn" + std::to_string(norm.level);
    const Shape shape{norm.stats.running_mean.size()};
    const ParamRecord* mean = take(prefix + ".running_mean", shape);
    const ParamRecord* var = take(prefix + ".running_var", shape);
    for (std::size_t i = 0; i < shape[0]; ++i) {
      norm.stats.running_mean[i] = static_cast<T>(mean->values[i]);
      norm.stats.running_var[i] = static_cast<T>(var->values[i]);
    }
  }
  if (!records.empty()) {
    throw SchemaError("schema mismatch: unexpected parameter '" +
                      records.begin()->first + "' in weight file");
  }
  return model;
}

template <typename T>
void save_weights(const StecModel<T>& model,
                  const std::filesystem::path& path) {
  write_weight_file(to_weight_file(model), path);
}

template <typename T>
StecModel<T> load_weights(const std::filesystem::path& path) {
  return from_weight_file<T>(read_weight_file(path));
}

template WeightFile to_weight_file(const StecModel<float>&);
template WeightFile to_weight_file(const StecModel<double>&);
template StecModel<float> from_weight_file(const WeightFile&);
template StecModel<double> from_weight_file(const WeightFile&);
template void save_weights(const StecModel<float>&, const std::filesystem::path&);
template void save_weights(const StecModel<double>&, const std::filesystem::path&);
template StecModel<float> load_weights(const std::filesystem::path&);
template StecModel<double> load_weights(const std::filesystem::path&);

}  // namespace stec
