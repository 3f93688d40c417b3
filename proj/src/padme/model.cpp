#include "padme/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/parallel.hpp"
#include "padme/rng.hpp"

namespace padme {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::PadmeEcfp: return "padme-ecfp";
    case Variant::PadmeGraphConv: return "padme-graphconv";
    case Variant::CompoundOnlyEcfp: return "compound-only-ecfp";
    case Variant::CompoundOnlyGraphConv: return "compound-only-graphconv";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::PadmeEcfp, Variant::PadmeGraphConv, Variant::CompoundOnlyEcfp,
                    Variant::CompoundOnlyGraphConv})
    if (variant_name(v) == name) return v;
  throw ConfigError("unknown model variant '" + std::string(name) + "'");
}

bool uses_protein(Variant v) { return v == Variant::PadmeEcfp || v == Variant::PadmeGraphConv; }
bool uses_graph(Variant v) { return v == Variant::PadmeGraphConv || v == Variant::CompoundOnlyGraphConv; }

namespace {

template <typename T>
std::string join(const std::vector<T>& v, char sep) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) ss << sep;
    if constexpr (std::is_floating_point_v<T>)
      ss << io::format_double(v[i]);
    else
      ss << v[i];
  }
  return ss.str();
}

std::vector<std::string> split_nonempty(std::string_view s, char sep) {
  if (s.empty()) return {};
  return io::split(s, sep);
}

std::size_t to_size(const std::string& s, std::string_view key) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("model config: '" + std::string(key) + "' expects a non-negative integer, got '" + s + "'");
  }
}

double to_double(const std::string& s, std::string_view key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("model config: '" + std::string(key) + "' expects a number, got '" + s + "'");
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (hidden_layers.empty() || hidden_layers.size() > 5)
    throw ConfigError("model: between 1 and 5 hidden layers are required");
  for (auto w : hidden_layers)
    if (w == 0) throw ConfigError("model: hidden layer width must be positive");
  if (dropout.size() != hidden_layers.size())
    throw ConfigError("model: one dropout rate per hidden layer is required");
  for (double r : dropout)
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("model: dropout rates must lie in [0, 1)");
  if (n_tasks == 0) throw ConfigError("model: n_tasks must be at least 1");
  if (uses_graph(variant)) {
    if (conv_widths.empty()) throw ConfigError("model: graph variants need at least one convolution");
    for (auto w : conv_widths)
      if (w == 0) throw ConfigError("model: convolution width must be positive");
    if (graph_dense_width == 0) throw ConfigError("model: graph dense width must be positive");
  } else if (ecfp_bits != 512 && ecfp_bits != 1024 && ecfp_bits != 2048 && ecfp_bits != 4096) {
    throw ConfigError("model: ecfp bits must be 512, 1024, 2048 or 4096");
  }
  if (!uses_protein(variant) && protein_vocabulary.empty())
    throw ConfigError("model: compound-only variants need a protein vocabulary");
}

std::string ModelConfig::featurizer_signature() const {
  std::ostringstream ss;
  if (uses_graph(variant))
    ss << atom_layout.signature();
  else
    ss << kEcfpVersion << ";radius=" << ecfp_radius << ";bits=" << ecfp_bits;
  if (uses_protein(variant)) ss << "|" << kPscVersion;
  return ss.str();
}

std::string ModelConfig::to_text() const {
  std::ostringstream ss;
  ss << "variant=" << variant_name(variant) << "\n";
  ss << "hidden_layers=" << join(hidden_layers, ',') << "\n";
  ss << "dropout=" << join(dropout, ',') << "\n";
  ss << "batchnorm=" << (batchnorm ? 1 : 0) << "\n";
  ss << "n_tasks=" << n_tasks << "\n";
  ss << "ecfp_radius=" << ecfp_radius << "\n";
  ss << "ecfp_bits=" << ecfp_bits << "\n";
  ss << "atom_vocabulary=" << join(atom_layout.vocabulary, '|') << "\n";
  ss << "max_degree=" << atom_layout.max_degree << "\n";
  ss << "max_hydrogens=" << atom_layout.max_hydrogens << "\n";
  ss << "conv_widths=" << join(conv_widths, ',') << "\n";
  ss << "graph_dense_width=" << graph_dense_width << "\n";
  ss << "readout=" << (mean_readout ? "mean" : "sum") << "\n";
  ss << "seed=" << seed << "\n";
  ss << "protein_vocabulary=" << join(protein_vocabulary, ',') << "\n";
  return ss.str();
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  ModelConfig c;
  std::map<std::string, std::string> kv;
  for (const auto& line : io::split(text, '\n')) {
    if (io::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("model config: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw FormatError("model config: missing key '" + k + "'");
    return it->second;
  };
  c.variant = parse_variant(get("variant"));
  c.hidden_layers.clear();
  for (const auto& s : split_nonempty(get("hidden_layers"), ',')) c.hidden_layers.push_back(to_size(s, "hidden_layers"));
  c.dropout.clear();
  for (const auto& s : split_nonempty(get("dropout"), ',')) c.dropout.push_back(to_double(s, "dropout"));
  c.batchnorm = get("batchnorm") == "1";
  c.n_tasks = to_size(get("n_tasks"), "n_tasks");
  c.ecfp_radius = static_cast<std::uint32_t>(to_size(get("ecfp_radius"), "ecfp_radius"));
  c.ecfp_bits = static_cast<std::uint32_t>(to_size(get("ecfp_bits"), "ecfp_bits"));
  c.atom_layout.vocabulary = split_nonempty(get("atom_vocabulary"), '|');
  c.atom_layout.max_degree = to_size(get("max_degree"), "max_degree");
  c.atom_layout.max_hydrogens = to_size(get("max_hydrogens"), "max_hydrogens");
  c.conv_widths.clear();
  for (const auto& s : split_nonempty(get("conv_widths"), ',')) c.conv_widths.push_back(to_size(s, "conv_widths"));
  c.graph_dense_width = to_size(get("graph_dense_width"), "graph_dense_width");
  c.mean_readout = get("readout") == "mean";
  c.seed = to_size(get("seed"), "seed");
  c.protein_vocabulary = split_nonempty(get("protein_vocabulary"), ',');
  return c;
}

FeatureStore FeatureStore::build(const ModelConfig& cfg, std::span<const std::string> smiles,
                                 std::span<const ProteinEntry> proteins) {
  FeatureStore s;
  s.signature_ = cfg.featurizer_signature();
  s.compounds_.resize(smiles.size());
  const bool graph = uses_graph(cfg.variant);
  parallel_for(smiles.size(), [&](std::size_t i) {
    CompoundFeatures& c = s.compounds_[i];
    try {
      c.graph = parse_smiles(smiles[i]);
      if (graph)
        c.atoms = atom_features(c.graph, cfg.atom_layout);
      else
        c.fingerprint = ecfp(c.graph, cfg.ecfp_radius, cfg.ecfp_bits);
    } catch (const Error& e) {
      throw DataError("compound '" + smiles[i] + "': " + e.what());
    }
  });
  for (const auto& p : proteins) s.protein_ids_.push_back(p.id);
  if (uses_protein(cfg.variant)) {
    s.proteins_.resize(proteins.size());
    parallel_for(proteins.size(), [&](std::size_t i) {
      try {
        s.proteins_[i] = psc(proteins[i].sequence, proteins[i].phosphorylated);
      } catch (const Error& e) {
        throw DataError("protein '" + proteins[i].id + "': " + e.what());
      }
    });
  }
  return s;
}

namespace {

Parameter he_uniform(std::string name, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  Tensor w = Tensor::matrix(fan_in, fan_out);
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
  return Parameter(std::move(name), std::move(w));
}

}  // namespace

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(cfg_.seed);
  if (uses_graph(cfg_.variant)) {
    std::size_t in = cfg_.atom_layout.width();
    for (std::size_t i = 0; i < cfg_.conv_widths.size(); ++i) {
      convs_.push_back(GraphConvParams::create("conv" + std::to_string(i), in, cfg_.conv_widths[i],
                                               cfg_.atom_layout.max_degree, rng));
      in = cfg_.conv_widths[i];
    }
    DenseLayer d{};
    d.weight = params_.size();
    params_.push_back(he_uniform("graph_dense.w", in, cfg_.graph_dense_width, rng));
    d.bias = params_.size();
    params_.emplace_back("graph_dense.b", Tensor({cfg_.graph_dense_width}, 0.0));
    graph_dense_ = d;
  }
  std::size_t in = input_width();
  for (std::size_t l = 0; l < cfg_.hidden_layers.size(); ++l) {
    const std::size_t width = cfg_.hidden_layers[l];
    const std::string prefix = "dense" + std::to_string(l);
    DenseLayer d{};
    d.weight = params_.size();
    params_.push_back(he_uniform(prefix + ".w", in, width, rng));
    d.bias = params_.size();
    params_.emplace_back(prefix + ".b", Tensor({width}, 0.0));
    if (cfg_.batchnorm) {
      d.gamma = params_.size();
      params_.emplace_back(prefix + ".bn_gamma", Tensor({width}, 1.0));
      d.beta = params_.size();
      params_.emplace_back(prefix + ".bn_beta", Tensor({width}, 0.0));
      bn_states_.emplace_back(width);
    }
    hidden_.push_back(d);
    in = width;
  }
  const double limit = std::sqrt(6.0 / static_cast<double>(in + output_width()));
  Tensor w = Tensor::matrix(in, output_width());
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
  output_.weight = params_.size();
  params_.emplace_back("output.w", std::move(w));
  output_.bias = params_.size();
  params_.emplace_back("output.b", Tensor({output_width()}, 0.0));

  for (std::size_t i = 0; i < cfg_.protein_vocabulary.size(); ++i) protein_slot_[cfg_.protein_vocabulary[i]] = i;
  index_parameters();
}

void Model::index_parameters() {
  param_ptrs_.clear();
  for (auto& c : convs_) c.collect(param_ptrs_);
  for (auto& p : params_) param_ptrs_.push_back(&p);
}

std::vector<const Parameter*> Model::parameters() const { return {param_ptrs_.begin(), param_ptrs_.end()}; }

std::size_t Model::compound_width() const {
  return uses_graph(cfg_.variant) ? cfg_.graph_dense_width : cfg_.ecfp_bits;
}

std::size_t Model::input_width() const { return compound_width() + (uses_protein(cfg_.variant) ? kPscWidth : 0); }

std::size_t Model::output_width() const {
  return uses_protein(cfg_.variant) ? cfg_.n_tasks : cfg_.n_tasks * cfg_.protein_vocabulary.size();
}

BatchInput Model::make_batch(const FeatureStore& store, std::span<const PairRef> pairs) const {
  if (store.signature() != cfg_.featurizer_signature())
    throw DataError("featurization mismatch: model expects '" + cfg_.featurizer_signature() + "', features are '" +
                    store.signature() + "'");
  BatchInput b;
  b.size = pairs.size();
  if (uses_graph(cfg_.variant)) {
    std::vector<const MolGraph*> graphs;
    std::vector<const AtomFeatureMatrix*> feats;
    for (const auto& p : pairs) {
      graphs.push_back(&store.compound(p.compound).graph);
      feats.push_back(&store.compound(p.compound).atoms);
    }
    b.graph = make_mol_batch(graphs, feats, cfg_.atom_layout.max_degree);
  } else {
    b.compound = Tensor::matrix(pairs.size(), cfg_.ecfp_bits);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      for (auto bit : store.compound(pairs[i].compound).fingerprint.on_bits()) b.compound.at(i, bit) = 1.0;
  }
  if (uses_protein(cfg_.variant)) {
    if (!store.has_protein_descriptors()) throw DataError("feature store has no protein descriptors");
    b.protein = Tensor::matrix(pairs.size(), kPscWidth);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto v = store.protein(pairs[i].protein).values();
      std::copy(v.begin(), v.end(), b.protein.data() + i * kPscWidth);
    }
  } else {
    for (const auto& p : pairs) {
      const auto& id = store.protein_id(p.protein);
      auto it = protein_slot_.find(id);
      if (it == protein_slot_.end())
        throw DataError("unknown protein id '" + id + "' for a compound-only model");
      b.output_slot.push_back(it->second);
    }
  }
  return b;
}

std::pair<Tensor, Tensor> Model::make_targets(const BatchInput& batch,
                                              std::span<const PairSample* const> samples) const {
  Tensor target = Tensor::matrix(samples.size(), output_width());
  Tensor weight = Tensor::matrix(samples.size(), output_width());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PairSample& s = *samples[i];
    if (s.target.size() != cfg_.n_tasks || s.mask.size() != cfg_.n_tasks)
      throw ShapeError("sample task count does not match model n_tasks");
    const std::size_t base = uses_protein(cfg_.variant) ? 0 : batch.output_slot.at(i) * cfg_.n_tasks;
    for (std::size_t t = 0; t < cfg_.n_tasks; ++t) {
      target.at(i, base + t) = s.target[t];
      weight.at(i, base + t) = s.mask[t];
    }
  }
  return {std::move(target), std::move(weight)};
}

Var Model::build(Tape& tape, const BatchInput& batch, Model* trainable, std::uint64_t dropout_seed) const {
  auto bind = [&](std::size_t idx) {
    return trainable ? tape.param(trainable->params_[idx]) : tape.frozen(params_[idx]);
  };
  Var x;
  if (uses_graph(cfg_.variant)) {
    const MolBatch& mb = *batch.graph;
    Var h = tape.constant(mb.features);
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      h = trainable ? graph_conv(tape, h, mb, trainable->convs_[i]) : graph_conv_frozen(tape, h, mb, convs_[i]);
      h = graph_pool(tape, h, mb);
    }
    h = tape.relu(tape.add_bias(tape.matmul(h, bind(graph_dense_->weight)), bind(graph_dense_->bias)));
    x = graph_gather(tape, h, mb, cfg_.mean_readout);
  } else {
    x = tape.constant(batch.compound);
  }
  if (uses_protein(cfg_.variant)) x = tape.concat_cols(x, tape.constant(batch.protein));

  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    const DenseLayer& d = hidden_[l];
    x = tape.add_bias(tape.matmul(x, bind(d.weight)), bind(d.bias));
    if (cfg_.batchnorm) {
      x = trainable ? tape.batch_norm(x, bind(d.gamma), bind(d.beta), &trainable->bn_states_[l])
                    : tape.batch_norm_eval(x, bind(d.gamma), bind(d.beta), bn_states_[l]);
    }
    x = tape.relu(x);
    if (trainable && cfg_.dropout[l] > 0.0) x = tape.dropout(x, cfg_.dropout[l], derive_seed(dropout_seed, l));
  }
  return tape.add_bias(tape.matmul(x, bind(output_.weight)), bind(output_.bias));
}

Var Model::forward_train(Tape& tape, const BatchInput& batch, std::uint64_t dropout_seed) {
  return build(tape, batch, this, dropout_seed);
}

Var Model::forward_eval(Tape& tape, const BatchInput& batch) const { return build(tape, batch, nullptr, 0); }

Tensor Model::predict(const FeatureStore& store, std::span<const PairRef> pairs, std::size_t batch_size) const {
  Tensor out = Tensor::matrix(pairs.size(), cfg_.n_tasks);
  for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
    const std::size_t end = std::min(pairs.size(), start + batch_size);
    const BatchInput batch = make_batch(store, pairs.subspan(start, end - start));
    Tape tape;
    const Var y = forward_eval(tape, batch);
    tape.forward({}, false);
    const Tensor& v = tape.value(y);
    for (std::size_t i = 0; i < batch.size; ++i) {
      const std::size_t base = uses_protein(cfg_.variant) ? 0 : batch.output_slot[i] * cfg_.n_tasks;
      for (std::size_t t = 0; t < cfg_.n_tasks; ++t) out.at(start + i, t) = v.at(i, base + t);
    }
  }
  return out;
}

ModelState Model::snapshot() const {
  ModelState s;
  for (const Parameter* p : param_ptrs_) s.params.push_back(p->value);
  s.batchnorm = bn_states_;
  return s;
}

void Model::restore(const ModelState& state) {
  if (state.params.size() != param_ptrs_.size() || state.batchnorm.size() != bn_states_.size())
    throw ShapeError("model state does not match architecture");
  for (std::size_t i = 0; i < param_ptrs_.size(); ++i) {
    if (!state.params[i].same_shape(param_ptrs_[i]->value))
      throw ShapeError("model state shape mismatch for " + param_ptrs_[i]->name);
    param_ptrs_[i]->value = state.params[i];
  }
  bn_states_ = state.batchnorm;
}

namespace {

constexpr std::string_view kCheckpointMagic = "PADMECKP";

void put_tensor(io::BinaryWriter& w, const Tensor& t) {
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) w.u64(d);
  for (double v : t.values()) w.f64(v);
}

Tensor get_tensor(io::BinaryReader& r) {
  const std::uint32_t rank = r.u32();
  if (rank > 8) throw FormatError("checkpoint: implausible tensor rank");
  std::vector<std::size_t> shape(rank);
  std::size_t n = 1;
  for (auto& d : shape) {
    d = r.u64();
    n *= d;
  }
  if (n * 8 > r.remaining()) throw FormatError("checkpoint: tensor exceeds file size");
  std::vector<double> data(n);
  for (double& v : data) v = r.f64();
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Model& model, const AdamState& adam, std::string_view run_config) {
  io::BinaryWriter w;
  w.raw(kCheckpointMagic);
  w.u16(kCheckpointMajor);
  w.u16(kCheckpointMinor);
  w.str(run_config);
  w.str(model.config().to_text());
  w.str(model.config().featurizer_signature());
  w.u64(model.config().seed);
  const auto params = model.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    w.str(p->name);
    put_tensor(w, p->value);
  }
  const auto bn = model.batchnorm_states();
  w.u32(static_cast<std::uint32_t>(bn.size()));
  for (const auto& s : bn) {
    put_tensor(w, s.running_mean);
    put_tensor(w, s.running_var);
    w.f64(s.momentum);
    w.f64(s.epsilon);
  }
  w.u64(adam.step);
  w.u32(static_cast<std::uint32_t>(adam.m.size()));
  for (const auto& t : adam.m) put_tensor(w, t);
  for (const auto& t : adam.v) put_tensor(w, t);
  return w.bytes();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::BinaryReader r(bytes);
  if (r.remaining() < kCheckpointMagic.size() || r.raw(kCheckpointMagic.size()) != kCheckpointMagic)
    throw FormatError("not a model checkpoint");
  const auto major = r.u16();
  const auto minor = r.u16();
  if (major != kCheckpointMajor)
    throw FormatError("checkpoint version " + std::to_string(major) + "." + std::to_string(minor) +
                      " is not supported (expected major " + std::to_string(kCheckpointMajor) + ")");
  std::string run_config = r.str();
  ModelConfig cfg = ModelConfig::from_text(r.str());
  const std::string signature = r.str();
  if (signature != cfg.featurizer_signature())
    throw FormatError("checkpoint featurizer '" + signature + "' is incompatible with this build ('" +
                      cfg.featurizer_signature() + "')");
  if (r.u64() != cfg.seed) throw FormatError("checkpoint seed does not match its model config");
  Model model(cfg);
  const auto params = model.parameters();
  if (r.u32() != params.size()) throw FormatError("checkpoint parameter count does not match architecture");
  for (Parameter* p : params) {
    const std::string name = r.str();
    if (name != p->name) throw FormatError("checkpoint parameter '" + name + "' where '" + p->name + "' expected");
    Tensor t = get_tensor(r);
    if (!t.same_shape(p->value)) throw FormatError("checkpoint parameter '" + name + "' has the wrong shape");
    p->value = std::move(t);
    p->grad = Tensor(p->value.shape(), 0.0);
  }
  auto bn = model.batchnorm_states();
  if (r.u32() != bn.size()) throw FormatError("checkpoint batchnorm count does not match architecture");
  for (auto& s : bn) {
    s.running_mean = get_tensor(r);
    s.running_var = get_tensor(r);
    s.momentum = r.f64();
    s.epsilon = r.f64();
  }
  AdamState adam;
  adam.step = r.u64();
  const std::uint32_t n = r.u32();
  if (n != 0 && n != params.size()) throw FormatError("checkpoint optimizer state does not match architecture");
  for (std::uint32_t i = 0; i < n; ++i) adam.m.push_back(get_tensor(r));
  for (std::uint32_t i = 0; i < n; ++i) adam.v.push_back(get_tensor(r));
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint");
  return Checkpoint{std::move(run_config), std::move(model), std::move(adam)};
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const AdamState& adam,
                     std::string_view run_config) {
  io::write_bytes(path, encode_checkpoint(model, adam, run_config));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = io::read_bytes(path);
  try {
    return decode_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace padme
