#include "padme/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/log.hpp"
#include "padme/rng.hpp"

namespace padme {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train: batch_size must be at least 1");
  if (patience == 0) throw ConfigError("train: patience must be at least 1");
  if (max_epochs == 0) throw ConfigError("train: max_epochs must be at least 1");
  if (eval_every == 0) throw ConfigError("train: eval_every must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("train: learning_rate must be positive");
}

namespace {

std::vector<PairRef> refs_of(std::span<const PairSample> samples) {
  std::vector<PairRef> refs;
  refs.reserve(samples.size());
  for (const auto& s : samples) refs.push_back({s.compound, s.protein});
  return refs;
}

// Masked (truth, prediction) per task.
std::vector<std::pair<std::vector<double>, std::vector<double>>> per_task(std::span<const PairSample> samples,
                                                                            const Tensor& pred) {
  const std::size_t n_tasks = pred.cols();
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out(n_tasks);
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t t = 0; t < n_tasks; ++t)
      if (samples[i].mask[t] != 0.0) {
        out[t].first.push_back(samples[i].target[t]);
        out[t].second.push_back(pred.at(i, t));
      }
  return out;
}

CompositeScore composite_from(std::span<const PairSample> samples, const Tensor& pred) {
  const auto tasks = per_task(samples, pred);
  double rmse_sum = 0.0, ci_sum = 0.0;
  std::size_t rmse_n = 0, ci_n = 0;
  for (const auto& [y, yhat] : tasks) {
    if (y.empty()) continue;
    rmse_sum += rmse(y, yhat);
    ++rmse_n;
    if (has_comparable_pair(y)) {
      ci_sum += concordance_index(y, yhat);
      ++ci_n;
    }
  }
  if (rmse_n == 0) throw DataError("validation set has no observed values");
  CompositeScore s;
  s.mean_rmse = rmse_sum / static_cast<double>(rmse_n);
  if (ci_n) s.mean_ci = ci_sum / static_cast<double>(ci_n);
  s.value = s.mean_rmse - s.mean_ci.value_or(0.0);
  return s;
}

}  // namespace

CompositeScore composite_score(const Model& model, const FeatureStore& store, std::span<const PairSample> samples) {
  const auto refs = refs_of(samples);
  return composite_from(samples, model.predict(store, refs));
}

EvalReport evaluate_predictions(std::span<const PairSample> samples, const Tensor& predictions,
                                std::span<const std::string> task_names) {
  const auto tasks = per_task(samples, predictions);
  EvalReport r;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const std::string name = t < task_names.size() ? task_names[t] : "task" + std::to_string(t);
    r.tasks.push_back(task_metrics(name, tasks[t].first, tasks[t].second));
  }
  r.aggregate = aggregate(r.tasks);
  return r;
}

EvalReport evaluate(const Model& model, const FeatureStore& store, std::span<const PairSample> samples,
                    std::span<const std::string> task_names) {
  const auto refs = refs_of(samples);
  return evaluate_predictions(samples, model.predict(store, refs), task_names);
}

namespace {

double run_epoch(Model& model, Adam& adam, const FeatureStore& store, std::span<const PairSample> samples,
                 const TrainConfig& cfg, std::size_t epoch) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, 2 * epoch));
  rng.shuffle(order);
  const std::uint64_t dropout_base = derive_seed(cfg.seed, 2 * epoch + 1);

  double loss_sum = 0.0, weight_sum = 0.0;
  std::size_t batch_no = 0;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_no) {
    const std::size_t end = std::min(order.size(), start + cfg.batch_size);
    std::vector<PairRef> refs;
    std::vector<const PairSample*> batch_samples;
    for (std::size_t i = start; i < end; ++i) {
      refs.push_back({samples[order[i]].compound, samples[order[i]].protein});
      batch_samples.push_back(&samples[order[i]]);
    }
    const BatchInput batch = model.make_batch(store, refs);
    auto [target, weight] = model.make_targets(batch, batch_samples);
    double w = 0.0;
    for (double v : weight.values()) w += v;

    Tape tape;
    const Var pred = model.forward_train(tape, batch, derive_seed(dropout_base, batch_no));
    const Var loss = tape.weighted_mse(pred, tape.constant(std::move(target)), tape.constant(std::move(weight)));
    zero_grads(model.parameters());
    tape.forward({}, true);
    const double l = tape.value(loss)[0];
    if (!std::isfinite(l)) throw NumericError("training diverged at epoch " + std::to_string(epoch));
    tape.backward(loss);
    adam.step(model.parameters());
    loss_sum += l * w;
    weight_sum += w;
  }
  return weight_sum > 0.0 ? loss_sum / weight_sum : 0.0;
}

}  // namespace

TrainResult train(Model& model, const FeatureStore& store, std::span<const PairSample> train_set,
                  std::span<const PairSample> validation_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  Adam adam(AdamConfig{cfg.learning_rate});
  TrainResult result;
  std::optional<ModelState> best_state;
  std::size_t since_best = 0;
  bool warned_fallback = false;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = run_epoch(model, adam, store, train_set, cfg, epoch);
    bool stop = cfg.target_train_loss > 0.0 && rec.train_loss < cfg.target_train_loss;
    if (!validation_set.empty() && (epoch % cfg.eval_every == 0 || epoch == cfg.max_epochs || stop)) {
      const CompositeScore s = composite_score(model, store, validation_set);
      if (!s.mean_ci && !warned_fallback) {
        log_warn("validation set has no comparable pair; early stopping on RMSE alone");
        warned_fallback = true;
      }
      rec.val_rmse = s.mean_rmse;
      rec.val_ci = s.mean_ci;
      rec.composite = s.value;
      ++result.evaluations;
      if (!result.best_score || s.value < *result.best_score) {
        result.best_score = s.value;
        result.best_epoch = epoch;
        best_state = model.snapshot();
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        stop = true;
      }
    }
    result.history.push_back(rec);
    if (stop) break;
  }
  if (best_state) model.restore(*best_state);
  result.adam = adam.state();
  return result;
}

std::string history_csv(std::span<const EpochRecord> history) {
  auto cell = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); };
  std::string out = "epoch,train_loss,val_rmse,val_ci,composite\n";
  for (const auto& r : history)
    out += std::to_string(r.epoch) + "," + io::format_double(r.train_loss) + "," + cell(r.val_rmse) + "," +
           cell(r.val_ci) + "," + cell(r.composite) + "\n";
  return out;
}

double epoch_cost_probe(const ModelConfig& model_cfg, const FeatureStore& store, std::span<const PairSample> samples,
                        const TrainConfig& cfg, std::size_t epochs) {
  cfg.validate();
  if (samples.empty()) throw DataError("training set is empty");
  if (epochs == 0) throw ConfigError("probe needs at least one epoch");
  Model model(model_cfg);
  Adam adam(AdamConfig{cfg.learning_rate});
  std::vector<double> times;
  for (std::size_t e = 1; e <= epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    run_epoch(model, adam, store, samples, cfg, e);
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

}  // namespace padme
