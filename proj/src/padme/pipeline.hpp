#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "padme/config.hpp"
#include "padme/dataset.hpp"
#include "padme/domain.hpp"
#include "padme/hyperopt.hpp"
#include "padme/metrics.hpp"
#include "padme/splits.hpp"

namespace padme {

namespace fs = std::filesystem;

// Holds `<dir>/.lock` for the lifetime of the object; a second holder fails.
class RunDirLock {
 public:
  explicit RunDirLock(const fs::path& dir);
  ~RunDirLock();
  RunDirLock(const RunDirLock&) = delete;
  RunDirLock& operator=(const RunDirLock&) = delete;

 private:
  fs::path path_;
};

struct PreparedData {
  Dataset dataset;
  std::vector<PairSample> samples;
  LoadReport report;
  DatasetSummary summary;
};

// Load, transform, merge duplicates, filter and assemble pairs as configured.
PreparedData prepare_data(const RunConfig& cfg, const fs::path& data_dir);

std::vector<std::string> protein_ids(const Dataset& ds);
ModelConfig model_config_for(const RunConfig& cfg, const Dataset& ds);
FeatureStore feature_store_for(const ModelConfig& cfg, const Dataset& ds);

// Compound fingerprints at radius 2 for clustering, whatever the variant.
std::vector<Fingerprint> clustering_fingerprints(const Dataset& ds, std::uint32_t n_bits = 2048);

struct SplitOutcome {
  FoldAssignment folds;
  bool audit_ok = true;
  std::string audit_detail;
};
SplitOutcome make_split(const RunConfig& cfg, const PreparedData& data, SplitScheme scheme, std::size_t k,
                        std::uint64_t seed);
SplitOutcome audit_split(const RunConfig& cfg, const PreparedData& data, const FoldAssignment& folds);

// Fold CSV: pair_index,smiles,protein_id,fold
std::string folds_csv(const PreparedData& data, const FoldAssignment& folds);
FoldAssignment parse_folds_csv(std::string_view text, const PreparedData& data, SplitScheme scheme);

struct FeaturizeOutput {
  std::vector<fs::path> files;
  DatasetSummary summary;
};
FeaturizeOutput run_featurize(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir);

fs::path run_split(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir, SplitScheme scheme,
                   std::size_t k, std::uint64_t seed);

struct TrainOutput {
  fs::path checkpoint;
  fs::path history;
  TrainResult result;
  CompositeScore validation;
};
// Trains on a seeded random 90% of the pairs with early stopping on the rest.
TrainOutput run_train(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir);

struct PredictOptions {
  fs::path sequences;                  // proteins for the input pairs
  std::optional<fs::path> ad_from;     // training interactions for the AD
  std::optional<fs::path> ad_sequences;
};
// Input rows follow the interaction schema; the value column may be empty.
// Output: smiles,protein_id,task_id,value,prediction[,in_ad,ad_scope] with
// transformed values.
std::size_t run_predict(const fs::path& checkpoint, const fs::path& input, const fs::path& output,
                        const PredictOptions& options);

EvalReport run_evaluate(const fs::path& predictions, const fs::path& report_out);

struct CvRow {
  std::string scheme;
  std::size_t repetition = 0;
  std::size_t fold = 0;
  EvalReport report;
  bool leakage_ok = true;
};
struct CvOutput {
  std::vector<CvRow> rows;
  fs::path report;
};
CvOutput run_cv(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir);
// scheme,repetition,fold,n,rmse,r2,ci,leakage_ok then mean and std rows.
std::string cv_report_csv(const std::vector<CvRow>& rows, std::size_t repetitions);

// Applies a search point to a config. Keys are config keys or one of
// model.n_layers, model.layer_width, model.dropout_rate.
RunConfig apply_point(const RunConfig& base, const SearchSpace& space, const Point& p);
double composite_objective(const RunConfig& cfg, const PreparedData& data, const HoldoutSplit& holdout);

struct TuneOutput {
  SearchResult result;
  fs::path trials;
  fs::path best_config;
};
TuneOutput run_tune(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir,
                    const SearchSpace& space);

struct SmokeStage {
  std::string name;
  bool ok = false;
  std::string detail;
};
struct SmokeOutput {
  bool ok = false;
  std::vector<SmokeStage> stages;
};
// featurize, split under every scheme with audits, train, predict, evaluate,
// and re-read every artifact. Stops at the first failing stage.
SmokeOutput run_smoke(const fs::path& data_dir, const fs::path& out_dir, std::uint64_t seed);
RunConfig smoke_config(std::uint64_t seed);

}  // namespace padme
