#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace padme {

// Throws DataError on empty or mismatched input.
double rmse(std::span<const double> y, std::span<const double> yhat);
// Coefficient of determination 1 - SSres/SStot. Throws DataError when y has
// zero variance or fewer than two values.
double r2(std::span<const double> y, std::span<const double> yhat);

// Concordance index in O(n log n). Throws DataError when no pair has
// distinct true values.
double concordance_index(std::span<const double> y, std::span<const double> yhat);
// Direct enumeration over all pairs.
double concordance_index_brute(std::span<const double> y, std::span<const double> yhat);
bool has_comparable_pair(std::span<const double> y);

struct TaskMetrics {
  std::string task;
  std::size_t n = 0;
  std::optional<double> rmse;
  std::optional<double> r2;
  std::optional<double> ci;
};

struct AggregateMetrics {
  std::optional<double> rmse;
  std::optional<double> r2;
  std::optional<double> ci;
  std::size_t n = 0;
  // Set when some task with records was left out of an aggregate because
  // its metric was undefined.
  bool excluded_tasks = false;
};

// Per-task metrics; undefined ones are left empty.
TaskMetrics task_metrics(std::string task, std::span<const double> y, std::span<const double> yhat);

// Record-count weighted mean of a metric. Throws DataError when all counts
// are zero.
double weighted_mean(std::span<const double> values, std::span<const std::size_t> counts);
AggregateMetrics aggregate(std::span<const TaskMetrics> tasks);

struct EvalReport {
  std::vector<TaskMetrics> tasks;
  AggregateMetrics aggregate;
};

// CSV: task,n,rmse,r2,ci with one row per task and a final `weighted` row.
// Undefined values are written as `nan`.
std::string report_csv(const EvalReport& report);
EvalReport parse_report_csv(std::string_view text);
std::string report_table(const EvalReport& report);

}  // namespace padme
