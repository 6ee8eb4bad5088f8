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

#include "stec/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace stec {

namespace {

std::string upper(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("model." + key + ": expected a non-negative integer, got '" +
                      value + "'");
  }
}

bool parse_flag(const std::string& key, const std::string& value) {
  const std::string v = upper(value);
  if (v == "1" || v == "TRUE" || v == "YES" || v == "ON") return true;
  if (v == "0" || v == "FALSE" || v == "NO" || v == "OFF") return false;
  throw ConfigError("model." + key + ": expected a boolean, got '" + value + "'");
}

template <typename T>
Tensor<T> fan_in_uniform(Shape shape, std::size_t fan_in,
                         std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> values(numel(shape));
  for (T& v : values) v = static_cast<T>(dist(rng));
  return Tensor<T>::from_data(std::move(shape), std::move(values), true);
}

}  // namespace

VariantTraits traits(Variant variant) {
  switch (variant) {
    case Variant::kStec: return {false, true, Fusion::kConcat};
    case Variant::kBL: return {true, true, Fusion::kConcat};
    case Variant::kNF: return {true, false, Fusion::kConcat};
    case Variant::kLO: return {false, true, Fusion::kLastOnly};
    case Variant::kF: return {false, true, Fusion::kAdd};
  }
  throw ConfigError("unknown variant");
}

std::string_view variant_name(Variant variant) {
  switch (variant) {
    case Variant::kStec: return "STEC";
    case Variant::kBL: return "STEC_BL";
    case Variant::kNF: return "STEC_NF";
    case Variant::kLO: return "STEC_LO";
    case Variant::kF: return "STEC_F";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  std::string key = upper(trim(text));
  if (key.rfind("STEC_", 0) == 0) key = key.substr(5);
  if (key == "STEC") return Variant::kStec;
  if (key == "BL") return Variant::kBL;
  if (key == "NF") return Variant::kNF;
  if (key == "LO") return Variant::kLO;
  if (key == "F") return Variant::kF;
  throw ConfigError("unknown model variant '" + std::string(text) +
                    "' (expected STEC, STEC_BL, STEC_NF, STEC_LO or STEC_F)");
}

std::vector<Variant> all_variants() {
  return {Variant::kBL, Variant::kNF, Variant::kLO, Variant::kF,
          Variant::kStec};
}

void ModelConfig::validate() const {
  if (dim == 0) throw ConfigError("model.dim must be positive");
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("model.dim (" + std::to_string(dim) +
                      ") must be divisible by model.heads (" +
                      std::to_string(heads) + ")");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("model.dropout must be in [0, 1)");
  }
  for (std::size_t width : mlp_hidden) {
    if (width == 0) throw ConfigError("model.mlp_hidden widths must be positive");
  }
}

std::string serialize(const ModelConfig& config) {
  std::ostringstream out;
  out << "blocks=" << config.blocks << '\n'
      << "dim=" << config.dim << '\n'
      << "heads=" << config.heads << '\n'
      << "ffn_dim=" << config.ffn_dim << '\n'
      << "mlp_hidden=";
  for (std::size_t i = 0; i < config.mlp_hidden.size(); ++i) {
    if (i) out << ',';
    out << config.mlp_hidden[i];
  }
  out << '\n'
      << "dropout=" << std::setprecision(17) << config.dropout << '\n'
      << "variant=" << variant_name(config.variant) << '\n'
      << "residual=" << (config.residual ? 1 : 0) << '\n'
      << "layer_norm=" << (config.layer_norm ? 1 : 0) << '\n'
      << "seed=" << config.seed << '\n';
  return out.str();
}

ModelConfig parse_model_config(std::string_view text) {
  ModelConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("model config line without '=': " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "blocks") {
      config.blocks = parse_size(key, value);
    } else if (key == "dim") {
      config.dim = parse_size(key, value);
    } else if (key == "heads") {
      config.heads = parse_size(key, value);
    } else if (key == "ffn_dim") {
      config.ffn_dim = parse_size(key, value);
    } else if (key == "mlp_hidden") {
      config.mlp_hidden.clear();
      std::istringstream parts(value);
      std::string part;
      while (std::getline(parts, part, ',')) {
        part = trim(part);
        if (!part.empty()) config.mlp_hidden.push_back(parse_size(key, part));
      }
    } else if (key == "dropout") {
      try {
        config.dropout = std::stod(value);
      } catch (const std::exception&) {
        throw ConfigError("model.dropout: expected a number, got '" + value + "'");
      }
    } else if (key == "variant") {
      config.variant = parse_variant(value);
    } else if (key == "residual") {
      config.residual = parse_flag(key, value);
    } else if (key == "layer_norm") {
      config.layer_norm = parse_flag(key, value);
    } else if (key == "seed") {
      config.seed = parse_size(key, value);
    } else {
      throw ConfigError("unknown model config key '" + key + "'");
    }
  }
  return config;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

template <typename T>
StecModel<T>::StecModel(ModelConfig config, FeatureSchema schema,
                        Vocabulary vocab, NumericNormalizer normalizer)
    : config_(std::move(config)),
      schema_(std::move(schema)),
      vocab_(std::move(vocab)),
      normalizer_(std::move(normalizer)),
      rng_(config_.seed) {
  config_.validate();
  const VariantTraits wiring = traits(config_.variant);
  block_options_.use_ffn = wiring.use_ffn;
  block_options_.explicit_bilinear = wiring.explicit_bilinear;
  block_options_.residual = config_.residual;
  block_options_.layer_norm = config_.layer_norm;
  block_options_.dropout = config_.dropout;
  fusion_ = wiring.fusion;

  std::mt19937_64 init_rng(config_.seed);
  embedding_ = EmbeddingTable<T>(schema_, vocab_, config_.dim, init_rng);
  for (std::size_t b = 0; b < config_.blocks; ++b) {
    blocks_.push_back(StecBlockParams<T>::init(
        config_.dim, config_.heads, config_.effective_ffn_dim(),
        block_options_, init_rng));
  }
  final_ = BilinearLayerParams<T>::init(config_.dim, config_.heads,
                                        wiring.explicit_bilinear, init_rng);

  const std::size_t width = level_width();
  auto add_norm = [&](std::size_t level) {
    LevelNorm<T> norm;
    norm.level = level;
    norm.gamma = Tensor<T>::full({width}, T(1), true);
    norm.beta = Tensor<T>::zeros({width}, true);
    norm.stats = ops::BatchNormStats<T>(width);
    norms_.push_back(std::move(norm));
  };
  if (fusion_ == Fusion::kLastOnly) {
    add_norm(config_.blocks);
  } else {
    for (std::size_t level = 0; level <= config_.blocks; ++level) add_norm(level);
  }

  std::size_t in = fusion_width();
  for (std::size_t hidden : config_.mlp_hidden) {
    mlp_weights_.push_back(fan_in_uniform<T>({in, hidden}, in, init_rng));
    mlp_biases_.push_back(Tensor<T>::zeros({hidden}, true));
    in = hidden;
  }
  mlp_weights_.push_back(fan_in_uniform<T>({in, 1}, in, init_rng));
  mlp_biases_.push_back(Tensor<T>::zeros({1}, true));
}

template <typename T>
std::size_t StecModel<T>::level_width() const {
  const std::size_t f = schema_.num_fields();
  return f * f * config_.dim;
}

template <typename T>
std::size_t StecModel<T>::fusion_width() const {
  return fusion_ == Fusion::kConcat ? norms_.size() * level_width()
                                    : level_width();
}

template <typename T>
ForwardResult<T> StecModel<T>::forward(const Batch& batch, ops::NormMode mode) {
  return forward_embedded(embed_batch(batch, schema_, embedding_), mode);
}

template <typename T>
ForwardResult<T> StecModel<T>::forward_embedded(const Tensor<T>& x,
                                                ops::NormMode mode) {
  const std::size_t f = schema_.num_fields();
  if (x.rank() != 3 || x.dim(1) != f || x.dim(2) != config_.dim) {
    throw DimensionError("model input must be [B, " + std::to_string(f) +
                         ", " + std::to_string(config_.dim) + "], got " +
                         to_string(x.shape()));
  }
  const std::size_t rows = x.dim(0);
  const bool train = mode == ops::NormMode::kTrain;
  std::mt19937_64* rng = train && config_.dropout > 0.0 ? &rng_ : nullptr;

  ForwardResult<T> result;
  Tensor<T> hidden = x;
  for (const auto& block : blocks_) {
    auto out = block_forward(hidden, block, block_options_, rng);
    result.bilinear.push_back(out.bilinear);
    result.attention_weights.push_back(out.weights);
    hidden = out.output;
  }
  result.bilinear.push_back(bilinear_layer_forward(hidden, final_));

  const std::size_t width = level_width();
  for (auto& norm : norms_) {
    auto flat = ops::reshape(result.bilinear[norm.level], {rows, width});
    result.fused.push_back(
        ops::batchnorm(flat, norm.gamma, norm.beta, norm.stats, mode));
  }
  switch (fusion_) {
    case Fusion::kConcat:
      result.fusion = result.fused.size() == 1 ? result.fused.front()
                                               : ops::concat(result.fused, 1);
      break;
    case Fusion::kLastOnly:
      result.fusion = result.fused.front();
      break;
    case Fusion::kAdd:
      result.fusion = result.fused.front();
      for (std::size_t i = 1; i < result.fused.size(); ++i) {
        result.fusion = ops::add(result.fusion, result.fused[i]);
      }
      break;
  }

  Tensor<T> h = result.fusion;
  for (std::size_t layer = 0; layer + 1 < mlp_weights_.size(); ++layer) {
    h = ops::relu(ops::linear(h, mlp_weights_[layer], mlp_biases_[layer]));
    if (rng) h = ops::dropout(h, config_.dropout, *rng);
  }
  h = ops::linear(h, mlp_weights_.back(), mlp_biases_.back());
  result.logit = ops::reshape(h, {rows});
  result.prob = ops::sigmoid(result.logit);
  return result;
}

template <typename T>
NamedTensors<T> StecModel<T>::parameters() const {
  NamedTensors<T> out;
  embedding_.collect(out);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    blocks_[b].collect("block" + std::to_string(b), out);
  }
  final_.collect("final", out);
  for (const auto& norm : norms_) {
    const std::string prefix = "bn" + std::to_string(norm.level);
    out.emplace_back(prefix + ".gamma", norm.gamma);
    out.emplace_back(prefix + ".beta", norm.beta);
  }
  for (std::size_t l = 0; l < mlp_weights_.size(); ++l) {
    out.emplace_back("mlp" + std::to_string(l) + ".weight", mlp_weights_[l]);
    out.emplace_back("mlp" + std::to_string(l) + ".bias", mlp_biases_[l]);
  }
  return out;
}

template <typename T>
std::vector<ops::BatchNormStats<T>*> StecModel<T>::norm_stats() {
  std::vector<ops::BatchNormStats<T>*> out;
  for (auto& norm : norms_) out.push_back(&norm.stats);
  return out;
}

template <typename T>
StecModel<T> build_variant(const ModelConfig& config,
                           const FeatureSchema& schema,
                           const Vocabulary& vocab,
                           const NumericNormalizer& normalizer) {
  return StecModel<T>(config, schema, vocab, normalizer);
}

template <typename T>
std::size_t copy_parameters(const StecModel<T>& from, StecModel<T>& to) {
  std::map<std::string, Tensor<T>> source;
  for (auto& [name, tensor] : from.parameters()) source.emplace(name, tensor);
  std::size_t copied = 0;
  for (auto& [name, tensor] : to.parameters()) {
    auto it = source.find(name);
    if (it == source.end() || it->second.shape() != tensor.shape()) continue;
    Tensor<T> dst = tensor;
    std::ranges::copy(it->second.data(), dst.mutable_data().begin());
    ++copied;
  }
  for (auto& dst : to.level_norms()) {
    for (const auto& src : from.level_norms()) {
      if (src.level == dst.level &&
          src.stats.running_mean.size() == dst.stats.running_mean.size()) {
        dst.stats = src.stats;
      }
    }
  }
  return copied;
}

template <typename T>
LinearBaseline<T>::LinearBaseline(const FeatureSchema& schema,
                                  const Vocabulary& vocab, std::uint64_t seed)
    : schema_(schema) {
  std::mt19937_64 rng(seed);
  weights_ = EmbeddingTable<T>(schema, vocab, 1, rng);
  bias_ = Tensor<T>::zeros({1}, true);
}

template <typename T>
Tensor<T> LinearBaseline<T>::predict(const Batch& batch, ops::NormMode) {
  const std::size_t f = schema_.num_fields();
  auto x = ops::reshape(embed_batch(batch, schema_, weights_), {batch.size, f});
  const auto ones = Tensor<T>::full({f, 1}, T(1));
  auto logit = ops::linear(x, ones, bias_);
  return ops::sigmoid(ops::reshape(logit, {batch.size}));
}

template <typename T>
NamedTensors<T> LinearBaseline<T>::parameters() const {
  NamedTensors<T> out;
  weights_.collect(out);
  out.emplace_back("bias", bias_);
  return out;
}

template class StecModel<float>;
template class StecModel<double>;
template class LinearBaseline<float>;
template class LinearBaseline<double>;
template StecModel<float> build_variant(const ModelConfig&,
                                        const FeatureSchema&,
                                        const Vocabulary&,
                                        const NumericNormalizer&);
template StecModel<double> build_variant(const ModelConfig&,
                                         const FeatureSchema&,
                                         const Vocabulary&,
                                         const NumericNormalizer&);
template std::size_t copy_parameters(const StecModel<float>&,
                                     StecModel<float>&);
template std::size_t copy_parameters(const StecModel<double>&,
                                     StecModel<double>&);

}  // namespace stec
