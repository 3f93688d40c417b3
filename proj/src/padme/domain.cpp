#include "padme/domain.hpp"

#include <algorithm>

#include "padme/error.hpp"

namespace padme {

ADRange fit_ad(std::span<const double> responses) {
  if (responses.empty()) throw DataError("applicability domain needs training responses");
  const auto [lo, hi] = std::minmax_element(responses.begin(), responses.end());
  if (*lo == *hi) throw DataError("applicability domain needs at least two distinct responses");
  ADRange r;
  r.min = *lo;
  r.max = *hi;
  r.range_size = r.max - r.min;
  r.lower = r.min - kAdPadding * r.range_size;
  r.upper = r.max + kAdPadding * r.range_size;
  return r;
}

TaskAD fit_task_ad(std::span<const std::size_t> task, std::span<const double> value, std::size_t n_tasks) {
  if (task.size() != value.size()) throw DataError("task and value lists differ in length");
  std::vector<std::vector<double>> per(n_tasks);
  for (std::size_t i = 0; i < task.size(); ++i) per.at(task[i]).push_back(value[i]);
  TaskAD out;
  out.fitted.assign(n_tasks, false);
  out.ranges.resize(n_tasks);
  for (std::size_t t = 0; t < n_tasks; ++t) {
    const auto& v = per[t];
    if (v.empty() || std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) continue;
    out.ranges[t] = fit_ad(v);
    out.fitted[t] = true;
  }
  return out;
}

}  // namespace padme
