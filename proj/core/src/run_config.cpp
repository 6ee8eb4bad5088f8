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

#include "stec/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace stec {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  // A blank value is an empty list; an empty item inside a list is a typo.
  std::vector<std::string> out;
  if (trim(std::string(text)).empty()) return out;
  std::string item;
  std::istringstream in{std::string(text) + ","};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty item in list '" + std::string(text) + "'");
    out.push_back(item);
  }
  return out;
}

template <typename U>
U parse_unsigned(const std::string& key, const std::string& value) {
  U out{};
  const auto result = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || result.ec != std::errc() ||
      result.ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto result = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || result.ec != std::errc() ||
      result.ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

char parse_delimiter(const std::string& value) {
  if (value == "tab" || value == "\\t") return '\t';
  if (value == "comma") return ',';
  if (value == "space") return ' ';
  if (value.size() == 1) return value[0];
  throw ConfigError("data.delimiter: expected one character, 'tab', 'comma' or 'space'");
}

std::string delimiter_name(char delimiter) {
  if (delimiter == '\t') return "tab";
  if (delimiter == ',') return "comma";
  if (delimiter == ' ') return "space";
  return std::string(1, delimiter);
}

std::string real_text(double value) {
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

template <typename Seq>
std::string join(const Seq& values) {
  std::ostringstream out;
  bool first = true;
  for (const auto& v : values) {
    if (!first) out << ',';
    out << v;
    first = false;
  }
  return out.str();
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& value) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

// Values of one section, each key consumed once; leftovers are unknown keys.
class Section {
 public:
  Section(const pt::ptree& root, const std::string& name) : name_(name) {
    if (auto child = root.get_child_optional(name)) {
      for (const auto& [key, node] : *child) values_[key] = trim(node.data());
    }
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    std::string value = it->second;
    values_.erase(it);
    return value;
  }

  std::string key(const std::string& k) const { return name_ + "." + k; }

  void finish() const {
    if (!values_.empty()) {
      throw ConfigError("unknown key '" + name_ + "." + values_.begin()->first + "'");
    }
  }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
};

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split_list(text)) {
    seeds.push_back(parse_unsigned<std::uint64_t>("seed", item));
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    out.push_back(parse_unsigned<std::size_t>("list", item));
  }
  return out;
}

RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  static const std::set<std::string> kSections = {"data", "model", "train", "run"};
  for (const auto& [name, node] : root) {
    if (!kSections.count(name)) throw ConfigError("unknown config section [" + name + "]");
  }

  RunConfig config;
  {
    Section s(root, "data");
    const std::string source = s.take("source").value_or("file");
    if (source == "synthetic") {
      SynthSource synth;
      if (auto v = s.take("rule")) synth.spec.rule = parse_synth_rule(*v);
      if (auto v = s.take("cardinalities")) synth.spec.cardinalities = parse_size_list(*v);
      if (auto v = s.take("rows")) synth.spec.rows = parse_unsigned<std::size_t>(s.key("rows"), *v);
      if (auto v = s.take("noise")) synth.spec.noise = parse_real(s.key("noise"), *v);
      if (auto v = s.take("bayes_auc")) synth.target_bayes_auc = parse_real(s.key("bayes_auc"), *v);
      if (auto v = s.take("synth_seed")) synth.spec.seed = parse_unsigned<std::uint64_t>(s.key("synth_seed"), *v);
      config.synthetic = synth;
    } else if (source != "file") {
      throw ConfigError("data.source: expected file or synthetic, got '" + source + "'");
    }
    DatasetSpec& d = config.dataset;
    if (auto v = s.take("path")) d.path = resolve(base_dir, *v);
    if (auto v = s.take("train")) d.train_path = resolve(base_dir, *v);
    if (auto v = s.take("valid")) d.valid_path = resolve(base_dir, *v);
    if (auto v = s.take("test")) d.test_path = resolve(base_dir, *v);
    if (auto v = s.take("schema")) config.schema_path = resolve(base_dir, *v);
    if (auto v = s.take("delimiter")) d.delimiter = parse_delimiter(*v);
    if (auto v = s.take("header")) d.header = parse_bool(s.key("header"), *v);
    if (auto v = s.take("split")) {
      const auto parts = split_list(*v);
      if (parts.size() != 3) throw ConfigError("data.split: expected three ratios");
      d.train_ratio = parse_real("data.split", parts[0]);
      d.valid_ratio = parse_real("data.split", parts[1]);
      d.test_ratio = parse_real("data.split", parts[2]);
    }
    if (auto v = s.take("seed")) d.seed = parse_unsigned<std::uint64_t>(s.key("seed"), *v);
    if (auto v = s.take("min_freq")) d.min_freq = parse_unsigned<std::uint32_t>(s.key("min_freq"), *v);
    if (auto v = s.take("numeric")) d.numeric_mode = parse_numeric_mode(*v);
    if (auto v = s.take("streaming")) config.streaming = parse_bool(s.key("streaming"), *v);
    s.finish();
  }
  {
    Section s(root, "model");
    std::ostringstream lines;
    for (const char* key : {"blocks", "dim", "heads", "ffn_dim", "mlp_hidden",
                            "dropout", "variant", "residual", "layer_norm", "seed"}) {
      if (auto v = s.take(key)) {
        std::string value = *v;
        if (std::string(key) == "residual" || std::string(key) == "layer_norm") {
          value = parse_bool(s.key(key), value) ? "1" : "0";
        }
        lines << key << '=' << value << '\n';
      }
    }
    s.finish();
    config.model = parse_model_config(lines.str());
  }
  {
    Section s(root, "train");
    TrainConfig& t = config.train;
    if (auto v = s.take("lr")) t.lr = parse_real(s.key("lr"), *v);
    if (auto v = s.take("batch_size")) t.batch_size = parse_unsigned<std::size_t>(s.key("batch_size"), *v);
    if (auto v = s.take("lr_decay")) t.lr_decay = parse_real(s.key("lr_decay"), *v);
    if (auto v = s.take("patience")) t.patience = parse_unsigned<std::size_t>(s.key("patience"), *v);
    if (auto v = s.take("max_epochs")) t.max_epochs = parse_unsigned<std::size_t>(s.key("max_epochs"), *v);
    if (auto v = s.take("early_stop_rounds")) t.early_stop_rounds = parse_unsigned<std::size_t>(s.key("early_stop_rounds"), *v);
    if (auto v = s.take("min_delta")) t.min_delta = parse_real(s.key("min_delta"), *v);
    if (auto v = s.take("eval_batch_size")) t.eval_batch_size = parse_unsigned<std::size_t>(s.key("eval_batch_size"), *v);
    s.finish();
  }
  {
    Section s(root, "run");
    if (auto v = s.take("name")) config.name = *v;
    if (auto v = s.take("seeds")) config.seeds = parse_seed_list(*v);
    if (auto v = s.take("out")) config.out = resolve(base_dir, *v);
    if (auto v = s.take("precision")) config.precision = parse_unsigned<unsigned>(s.key("precision"), *v);
    s.finish();
  }
  if (!config.schema_path.empty() && !config.synthetic) {
    if (!std::filesystem::is_regular_file(config.schema_path)) {
      throw ConfigError("data.schema '" + config.schema_path.string() + "' does not exist");
    }
    config.dataset.columns = read_schema_file(config.schema_path);
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

void RunConfig::validate() const {
  if (name.empty()) throw ConfigError("run.name must not be empty");
  if (seeds.empty()) throw ConfigError("run.seeds must list at least one seed");
  if (precision != 32 && precision != 64) {
    throw ConfigError("run.precision must be 32 or 64");
  }
  model.validate();
  train.validate();
  if (synthetic) {
    synthetic->spec.validate();
    if (synthetic->target_bayes_auc &&
        !(*synthetic->target_bayes_auc > 0.5 && *synthetic->target_bayes_auc < 1.0)) {
      throw ConfigError("data.bayes_auc must lie in (0.5, 1)");
    }
  } else {
    if (schema_path.empty()) throw ConfigError("data.schema is not set");
    dataset.validate();
    if (streaming && !dataset.pre_split()) {
      throw ConfigError("data.streaming needs pre-split train/valid/test files");
    }
  }
}

std::string snapshot(const RunConfig& c) {
  std::ostringstream out;
  out << "[data]\n";
  if (c.synthetic) {
    const SynthSource& s = *c.synthetic;
    out << "source = synthetic\n"
        << "rule = " << synth_rule_name(s.spec.rule) << '\n'
        << "cardinalities = " << join(s.spec.cardinalities) << '\n'
        << "rows = " << s.spec.rows << '\n'
        << "noise = " << real_text(s.spec.noise) << '\n'
        << "synth_seed = " << s.spec.seed << '\n';
    if (s.target_bayes_auc) out << "bayes_auc = " << real_text(*s.target_bayes_auc) << '\n';
  } else {
    const DatasetSpec& d = c.dataset;
    out << "source = file\n";
    if (!d.path.empty()) out << "path = " << d.path.string() << '\n';
    if (!d.train_path.empty()) out << "train = " << d.train_path.string() << '\n';
    if (!d.valid_path.empty()) out << "valid = " << d.valid_path.string() << '\n';
    if (!d.test_path.empty()) out << "test = " << d.test_path.string() << '\n';
    out << "schema = " << c.schema_path.string() << '\n'
        << "delimiter = " << delimiter_name(d.delimiter) << '\n'
        << "header = " << (d.header ? "true" : "false") << '\n'
        << "numeric = " << numeric_mode_name(d.numeric_mode) << '\n'
        << "streaming = " << (c.streaming ? "true" : "false") << '\n';
  }
  out << "split = " << real_text(c.dataset.train_ratio) << ','
      << real_text(c.dataset.valid_ratio) << ',' << real_text(c.dataset.test_ratio) << '\n'
      << "seed = " << c.dataset.seed << '\n'
      << "min_freq = " << c.dataset.min_freq << '\n';

  out << "\n[model]\n";
  std::istringstream model(serialize(c.model));
  std::string line;
  while (std::getline(model, line)) {
    const auto eq = line.find('=');
    out << line.substr(0, eq) << " = " << line.substr(eq + 1) << '\n';
  }

  const TrainConfig& t = c.train;
  out << "\n[train]\n"
      << "lr = " << real_text(t.lr) << '\n'
      << "batch_size = " << t.batch_size << '\n'
      << "lr_decay = " << real_text(t.lr_decay) << '\n'
      << "patience = " << t.patience << '\n'
      << "max_epochs = " << t.max_epochs << '\n'
      << "early_stop_rounds = " << t.early_stop_rounds << '\n'
      << "min_delta = " << real_text(t.min_delta) << '\n'
      << "eval_batch_size = " << t.eval_batch_size << '\n';

  out << "\n[run]\n"
      << "name = " << c.name << '\n'
      << "seeds = " << join(c.seeds) << '\n'
      << "out = " << c.out.string() << '\n'
      << "precision = " << c.precision << '\n';
  return out.str();
}

PreparedData prepare_run_data(const RunConfig& config) {
  if (config.synthetic) {
    SynthSpec spec = config.synthetic->spec;
    if (config.synthetic->target_bayes_auc) {
      spec.noise = calibrate_noise(spec, *config.synthetic->target_bayes_auc);
    }
    const SynthData data = synth(spec);
    return prepare(split_synth(data, config.dataset.seed), config.dataset.min_freq);
  }
  if (config.streaming) return prepare_streaming(config.dataset);
  return prepare(load(config.dataset), config.dataset.min_freq);
}

}  // namespace stec
