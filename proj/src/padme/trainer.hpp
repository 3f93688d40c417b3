#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "padme/metrics.hpp"
#include "padme/model.hpp"

namespace padme {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  double learning_rate = 1e-3;
  std::uint64_t seed = 42;
  std::size_t eval_every = 1;
  // Stop once the training loss falls below this value (0 disables).
  double target_train_loss = 0.0;

  void validate() const;
};

struct CompositeScore {
  double value = 0.0;
  double mean_rmse = 0.0;
  std::optional<double> mean_ci;  // empty when no task has a comparable pair
};

// Unweighted mean of per-task RMSE minus unweighted mean of per-task CI over
// tasks with a comparable pair. Falls back to mean RMSE alone if there is no
// such task.
CompositeScore composite_score(const Model& model, const FeatureStore& store, std::span<const PairSample> samples);

// Per-task metrics over masked entries.
EvalReport evaluate(const Model& model, const FeatureStore& store, std::span<const PairSample> samples,
                    std::span<const std::string> task_names);
EvalReport evaluate_predictions(std::span<const PairSample> samples, const Tensor& predictions,
                                std::span<const std::string> task_names);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_rmse;
  std::optional<double> val_ci;
  std::optional<double> composite;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t evaluations = 0;
  std::optional<std::size_t> best_epoch;
  std::optional<double> best_score;
  AdamState adam;
};

// Mini-batch Adam training. With a validation set the model is left at the
// evaluated state with the lowest composite score. Throws DataError for an
// empty training set and NumericError if training diverges.
TrainResult train(Model& model, const FeatureStore& store, std::span<const PairSample> train_set,
                  std::span<const PairSample> validation_set, const TrainConfig& cfg);

// epoch,train_loss,val_rmse,val_ci,composite; empty cells for epochs without
// an evaluation.
std::string history_csv(std::span<const EpochRecord> history);

// Median wall time in seconds of `epochs` training epochs over the samples.
double epoch_cost_probe(const ModelConfig& model_cfg, const FeatureStore& store, std::span<const PairSample> samples,
                        const TrainConfig& cfg, std::size_t epochs = 3);

}  // namespace padme
