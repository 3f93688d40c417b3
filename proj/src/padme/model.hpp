#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "padme/fingerprint.hpp"
#include "padme/graphconv.hpp"
#include "padme/protein.hpp"
#include "padme/sample.hpp"
#include "padme/tensor.hpp"

namespace padme {

enum class Variant { PadmeEcfp, PadmeGraphConv, CompoundOnlyEcfp, CompoundOnlyGraphConv };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
bool uses_protein(Variant v);
bool uses_graph(Variant v);

struct ModelConfig {
  Variant variant = Variant::PadmeEcfp;
  std::vector<std::size_t> hidden_layers = {256, 256};
  std::vector<double> dropout = {0.0, 0.0};
  bool batchnorm = true;
  std::size_t n_tasks = 1;
  std::uint32_t ecfp_radius = 2;
  std::uint32_t ecfp_bits = 2048;
  AtomFeatureLayout atom_layout;
  std::vector<std::size_t> conv_widths = {64, 64};
  std::size_t graph_dense_width = 128;
  bool mean_readout = false;
  std::uint64_t seed = 42;
  // Compound-only variants: one output block per protein in this list.
  std::vector<std::string> protein_vocabulary;

  /// Throws ConfigError on invalid widths, rates or counts.
  void validate() const;
  std::string featurizer_signature() const;
  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);
};

struct CompoundFeatures {
  MolGraph graph;
  Fingerprint fingerprint;
  AtomFeatureMatrix atoms;
};

/// Featurized compounds and proteins, computed once and read-only during
/// training and prediction.
class FeatureStore {
 public:
  static FeatureStore build(const ModelConfig& cfg, std::span<const std::string> smiles,
                            std::span<const ProteinEntry> proteins);

  const std::string& signature() const { return signature_; }
  std::size_t compound_count() const { return compounds_.size(); }
  std::size_t protein_count() const { return protein_ids_.size(); }
  const CompoundFeatures& compound(std::size_t i) const { return compounds_.at(i); }
  const ProteinDescriptor& protein(std::size_t i) const { return proteins_.at(i); }
  const std::string& protein_id(std::size_t i) const { return protein_ids_.at(i); }
  bool has_protein_descriptors() const { return !proteins_.empty(); }

 private:
  std::string signature_;
  std::vector<CompoundFeatures> compounds_;
  std::vector<std::string> protein_ids_;
  std::vector<ProteinDescriptor> proteins_;
};

struct BatchInput {
  std::size_t size = 0;
  Tensor compound;  // fingerprint rows (ECFP variants)
  std::optional<MolBatch> graph;
  Tensor protein;  // descriptor rows (PADME variants)
  std::vector<std::size_t> output_slot;  // compound-only: protein slot per row
};

struct ModelState {
  std::vector<Tensor> params;
  std::vector<BatchNormState> batchnorm;
};

/// Feedforward regression network on the combined input vector
/// (compound part followed by protein part).
class Model {
 public:
  explicit Model(ModelConfig cfg);
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  std::size_t compound_width() const;
  std::size_t input_width() const;
  std::size_t output_width() const;

  std::span<Parameter* const> parameters() { return param_ptrs_; }
  std::vector<const Parameter*> parameters() const;
  std::span<BatchNormState> batchnorm_states() { return bn_states_; }
  std::span<const BatchNormState> batchnorm_states() const { return bn_states_; }

  BatchInput make_batch(const FeatureStore& store, std::span<const PairRef> pairs) const;
  // Targets and 0/1 weights laid out like the network output.
  std::pair<Tensor, Tensor> make_targets(const BatchInput& batch, std::span<const PairSample* const> samples) const;

  /// Training-mode graph: trainable parameters, batch statistics, dropout.
  Var forward_train(Tape& tape, const BatchInput& batch, std::uint64_t dropout_seed);
  /// Evaluation graph: frozen parameters, running statistics, no dropout.
  Var forward_eval(Tape& tape, const BatchInput& batch) const;

  /// Per-task predictions (rows = pairs, cols = n_tasks) in evaluation mode.
  Tensor predict(const FeatureStore& store, std::span<const PairRef> pairs, std::size_t batch_size = 256) const;

  ModelState snapshot() const;
  void restore(const ModelState& state);

 private:
  struct DenseLayer {
    std::size_t weight, bias, gamma = 0, beta = 0;
  };

  // trainable is this model (non-const) for training graphs, null for eval.
  Var build(Tape& tape, const BatchInput& batch, Model* trainable, std::uint64_t dropout_seed) const;
  void index_parameters();

  ModelConfig cfg_;
  std::vector<GraphConvParams> convs_;
  std::vector<Parameter> params_;
  std::vector<DenseLayer> hidden_;
  std::optional<DenseLayer> graph_dense_;
  DenseLayer output_{};
  std::vector<BatchNormState> bn_states_;
  std::vector<Parameter*> param_ptrs_;
  std::unordered_map<std::string, std::size_t> protein_slot_;
};

// Binary checkpoint: "PADMECKP" magic, u16 major, u16 minor, then
// length-prefixed run-config text, model-config text and featurizer
// signature, u64 seed, parameter tensors (name, rank, u64 dims, f64 data),
// batchnorm running statistics and Adam state (u64 step, m and v tensors).
inline constexpr std::uint16_t kCheckpointMajor = 1;
inline constexpr std::uint16_t kCheckpointMinor = 0;

struct Checkpoint {
  std::string run_config;
  Model model;
  AdamState adam;
};

std::vector<std::uint8_t> encode_checkpoint(const Model& model, const AdamState& adam, std::string_view run_config);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Model& model, const AdamState& adam,
                     std::string_view run_config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace padme
