#include "padme/config.hpp"

#include <charconv>
#include <cmath>

#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/splits.hpp"

namespace padme {

namespace {

enum class Type { Text, Count, Number, Flag, Counts, Numbers, Variant, Scheme, Strategy, Readout, Remap };

struct KeySpec {
  const char* key;
  Type type;
  const char* fallback;
};

const std::vector<KeySpec>& specs() {
  static const std::vector<KeySpec> table = {
      {"data.interactions", Type::Text, "interactions.csv"},
      {"data.sequences", Type::Text, "sequences.tsv"},
      {"data.assay_map", Type::Text, ""},
      {"data.inactive_remap", Type::Remap, ""},
      {"data.min_obs", Type::Count, "0"},
      {"data.malformed_tolerance", Type::Count, "0"},
      {"data.oversample_ratio", Type::Number, "0"},
      {"model.variant", Type::Variant, "padme-ecfp"},
      {"model.hidden_layers", Type::Counts, "256,256"},
      {"model.dropout", Type::Numbers, "0"},
      {"model.batchnorm", Type::Flag, "true"},
      {"model.ecfp_radius", Type::Count, "2"},
      {"model.ecfp_bits", Type::Count, "2048"},
      {"model.max_degree", Type::Count, "6"},
      {"model.graph_conv_widths", Type::Counts, "64,64"},
      {"model.graph_dense_width", Type::Count, "128"},
      {"model.readout", Type::Readout, "sum"},
      {"train.batch_size", Type::Count, "32"},
      {"train.max_epochs", Type::Count, "100"},
      {"train.patience", Type::Count, "5"},
      {"train.learning_rate", Type::Number, "0.001"},
      {"train.eval_every", Type::Count, "1"},
      {"split.scheme", Type::Scheme, "warm"},
      {"split.k", Type::Count, "5"},
      {"split.repetitions", Type::Count, "3"},
      {"split.cluster_threshold", Type::Number, "0.7"},
      {"tune.strategy", Type::Strategy, "gp"},
      {"tune.budget", Type::Count, "20"},
      {"tune.n_init", Type::Count, "5"},
      {"tune.candidates", Type::Count, "1024"},
      {"tune.space", Type::Text, ""},
      {"run.seed", Type::Count, "42"},
  };
  return table;
}

const KeySpec* find_spec(std::string_view key) {
  for (const auto& s : specs())
    if (key == s.key) return &s;
  return nullptr;
}

std::optional<std::size_t> to_count(std::string_view s) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> to_number(std::string_view s) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool valid(Type t, const std::string& v) {
  switch (t) {
    case Type::Text: return v.find('\n') == std::string::npos;
    case Type::Count: return to_count(v).has_value();
    case Type::Number: return to_number(v).has_value();
    case Type::Flag: return v == "true" || v == "false";
    case Type::Counts:
    case Type::Numbers:
      if (v.empty()) return false;
      for (const auto& part : io::split(v, ','))
        if (t == Type::Counts ? !to_count(io::trim(part)) : !to_number(io::trim(part))) return false;
      return true;
    case Type::Variant:
      try {
        parse_variant(v);
        return true;
      } catch (const ConfigError&) {
        return false;
      }
    case Type::Scheme:
      try {
        parse_scheme(v);
        return true;
      } catch (const ConfigError&) {
        return false;
      }
    case Type::Strategy: return v == "gp" || v == "random";
    case Type::Readout: return v == "sum" || v == "mean";
    case Type::Remap: {
      if (v.empty()) return true;
      const auto parts = io::split(v, ':');
      return parts.size() == 2 && to_number(parts[0]) && to_number(parts[1]);
    }
  }
  return false;
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& s : specs()) values_[s.key] = s.fallback;
}

std::vector<std::string> RunConfig::known_keys() {
  std::vector<std::string> out;
  for (const auto& s : specs()) out.emplace_back(s.key);
  return out;
}

bool RunConfig::has_key(const std::string& key) const { return find_spec(key) != nullptr; }

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_spec(key);
  if (!spec) throw ConfigError("unknown config key '" + key + "'");
  const std::string v(io::trim(value));
  if (!valid(spec->type, v)) throw ConfigError("invalid value '" + v + "' for config key '" + key + "'");
  values_[key] = v;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig c;
  std::string section;
  std::size_t line_no = 0;
  for (const auto& raw : io::split(text, '\n')) {
    ++line_no;
    auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
      section = std::string(io::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected `key = value`");
    std::string key(io::trim(line.substr(0, eq)));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    try {
      c.set(key, std::string(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  try {
    return parse(io::read_text(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

double RunConfig::number(const std::string& key) const {
  const auto v = to_number(get(key));
  if (!v) throw ConfigError("config key '" + key + "' is not a number");
  return *v;
}

std::size_t RunConfig::count(const std::string& key) const {
  const auto v = to_count(get(key));
  if (!v) throw ConfigError("config key '" + key + "' is not a count");
  return *v;
}

bool RunConfig::flag(const std::string& key) const { return get(key) == "true"; }

std::vector<std::size_t> RunConfig::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& p : io::split(get(key), ',')) out.push_back(*to_count(io::trim(p)));
  return out;
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : io::split(get(key), ',')) out.push_back(*to_number(io::trim(p)));
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void RunConfig::save(const std::filesystem::path& path) const { io::write_text(path, to_text()); }

ModelConfig RunConfig::model_config(std::size_t n_tasks, std::vector<std::string> protein_vocabulary) const {
  ModelConfig m;
  m.variant = parse_variant(get("model.variant"));
  m.hidden_layers = counts("model.hidden_layers");
  m.dropout = numbers("model.dropout");
  if (m.dropout.size() == 1 && m.hidden_layers.size() > 1) m.dropout.assign(m.hidden_layers.size(), m.dropout[0]);
  m.batchnorm = flag("model.batchnorm");
  m.n_tasks = n_tasks;
  m.ecfp_radius = static_cast<std::uint32_t>(count("model.ecfp_radius"));
  m.ecfp_bits = static_cast<std::uint32_t>(count("model.ecfp_bits"));
  m.atom_layout.max_degree = count("model.max_degree");
  m.conv_widths = counts("model.graph_conv_widths");
  m.graph_dense_width = count("model.graph_dense_width");
  m.mean_readout = get("model.readout") == "mean";
  m.seed = seed();
  if (!uses_protein(m.variant)) m.protein_vocabulary = std::move(protein_vocabulary);
  m.validate();
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.batch_size = count("train.batch_size");
  t.max_epochs = count("train.max_epochs");
  t.patience = count("train.patience");
  t.learning_rate = number("train.learning_rate");
  t.eval_every = count("train.eval_every");
  t.seed = seed();
  t.validate();
  return t;
}

}  // namespace padme
