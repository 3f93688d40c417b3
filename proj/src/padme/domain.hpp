#pragma once

#include <span>
#include <vector>

namespace padme {

struct ADRange {
  double lower = 0.0;
  double upper = 0.0;
  double min = 0.0;
  double max = 0.0;
  double range_size = 0.0;

  // Open interval.
  bool contains(double v) const { return lower < v && v < upper; }
};

inline constexpr double kAdPadding = 0.15;

// Throws DataError when fewer than two distinct values are given.
ADRange fit_ad(std::span<const double> responses);

// One range per task from (task, value) observations. Tasks with fewer than
// two distinct values have no range.
struct TaskAD {
  std::vector<bool> fitted;
  std::vector<ADRange> ranges;
};
TaskAD fit_task_ad(std::span<const std::size_t> task, std::span<const double> value, std::size_t n_tasks);

}  // namespace padme
