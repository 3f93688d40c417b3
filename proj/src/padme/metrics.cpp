#include "padme/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "padme/error.hpp"
#include "padme/io.hpp"

namespace padme {

namespace {

void check_lengths(std::span<const double> y, std::span<const double> yhat) {
  if (y.empty()) throw DataError("metric on empty input");
  if (y.size() != yhat.size()) throw DataError("metric inputs differ in length");
}

// Fenwick tree over prediction ranks.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // Count of inserted ranks < i.
  std::size_t prefix(std::size_t i) const {
    std::size_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::size_t> tree_;
};

}  // namespace

double rmse(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return std::sqrt(s / static_cast<double>(y.size()));
}

double r2(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  if (y.size() < 2) throw DataError("r2 needs at least two values");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) throw DataError("r2 undefined: true values have zero variance");
  return 1.0 - ss_res / ss_tot;
}

bool has_comparable_pair(std::span<const double> y) {
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] != y[0]) return true;
  return false;
}

double concordance_index_brute(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  double score = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (!(y[i] > y[j])) continue;
      ++pairs;
      if (yhat[i] > yhat[j])
        score += 1.0;
      else if (yhat[i] == yhat[j])
        score += 0.5;
    }
  if (pairs == 0) throw DataError("concordance index undefined: all true values are equal");
  return score / static_cast<double>(pairs);
}

double concordance_index(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  const std::size_t n = y.size();
  std::vector<double> sorted_hat(yhat.begin(), yhat.end());
  std::sort(sorted_hat.begin(), sorted_hat.end());
  sorted_hat.erase(std::unique(sorted_hat.begin(), sorted_hat.end()), sorted_hat.end());
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i)
    rank[i] = static_cast<std::size_t>(std::lower_bound(sorted_hat.begin(), sorted_hat.end(), yhat[i]) - sorted_hat.begin());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

  // Walk groups of equal y in increasing order; the tree holds every element
  // with strictly smaller y.
  Fenwick tree(sorted_hat.size());
  std::uint64_t concordant = 0, tied = 0, pairs = 0;
  std::size_t inserted = 0;
  for (std::size_t g = 0; g < n;) {
    std::size_t end = g;
    while (end < n && y[order[end]] == y[order[g]]) ++end;
    for (std::size_t k = g; k < end; ++k) {
      const std::size_t r = rank[order[k]];
      const std::size_t below = tree.prefix(r);
      const std::size_t below_or_equal = tree.prefix(r + 1);
      concordant += below;
      tied += below_or_equal - below;
    }
    pairs += static_cast<std::uint64_t>(end - g) * inserted;
    for (std::size_t k = g; k < end; ++k) tree.add(rank[order[k]]);
    inserted += end - g;
    g = end;
  }
  if (pairs == 0) throw DataError("concordance index undefined: all true values are equal");
  // Same accumulation order as the brute-force sum: whole scores then halves.
  return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) / static_cast<double>(pairs);
}

TaskMetrics task_metrics(std::string task, std::span<const double> y, std::span<const double> yhat) {
  TaskMetrics m;
  m.task = std::move(task);
  m.n = y.size();
  if (y.empty()) return m;
  m.rmse = rmse(y, yhat);
  if (has_comparable_pair(y)) {
    m.r2 = r2(y, yhat);
    m.ci = concordance_index(y, yhat);
  }
  return m;
}

double weighted_mean(std::span<const double> values, std::span<const std::size_t> counts) {
  if (values.size() != counts.size()) throw DataError("weighted mean inputs differ in length");
  double num = 0.0;
  std::size_t den = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += values[i] * static_cast<double>(counts[i]);
    den += counts[i];
  }
  if (den == 0) throw DataError("weighted mean with all counts zero");
  return num / static_cast<double>(den);
}

AggregateMetrics aggregate(std::span<const TaskMetrics> tasks) {
  AggregateMetrics a;
  for (const auto& t : tasks) a.n += t.n;
  if (a.n == 0) throw DataError("aggregate over tasks with no records");
  auto combine = [&](std::optional<double> TaskMetrics::*field) -> std::optional<double> {
    std::vector<double> v;
    std::vector<std::size_t> c;
    for (const auto& t : tasks) {
      if (t.n == 0) continue;
      if (!(t.*field)) {
        a.excluded_tasks = true;
        continue;
      }
      v.push_back(*(t.*field));
      c.push_back(t.n);
    }
    if (v.empty()) return std::nullopt;
    return weighted_mean(v, c);
  };
  a.rmse = combine(&TaskMetrics::rmse);
  a.r2 = combine(&TaskMetrics::r2);
  a.ci = combine(&TaskMetrics::ci);
  return a;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? io::format_double(*v) : "nan"; }

std::optional<double> parse_opt(const std::string& s) {
  if (s == "nan") return std::nullopt;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw FormatError("report: bad number '" + s + "'");
  }
}

}  // namespace

std::string report_csv(const EvalReport& report) {
  std::string out = "task,n,rmse,r2,ci\n";
  for (const auto& t : report.tasks)
    out += t.task + "," + std::to_string(t.n) + "," + opt(t.rmse) + "," + opt(t.r2) + "," + opt(t.ci) + "\n";
  const auto& a = report.aggregate;
  out += "weighted," + std::to_string(a.n) + "," + opt(a.rmse) + "," + opt(a.r2) + "," + opt(a.ci) + "\n";
  return out;
}

EvalReport parse_report_csv(std::string_view text) {
  EvalReport r;
  const auto lines = io::split(text, '\n');
  if (lines.empty() || lines[0] != "task,n,rmse,r2,ci") throw FormatError("report: unexpected header");
  bool saw_aggregate = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = io::split_csv(lines[i]);
    if (f.size() != 5) throw FormatError("report: line " + std::to_string(i + 1) + " needs 5 fields");
    TaskMetrics t;
    t.task = f[0];
    t.n = std::stoull(f[1]);
    t.rmse = parse_opt(f[2]);
    t.r2 = parse_opt(f[3]);
    t.ci = parse_opt(f[4]);
    if (t.task == "weighted") {
      r.aggregate = {t.rmse, t.r2, t.ci, t.n, false};
      saw_aggregate = true;
    } else {
      r.tasks.push_back(std::move(t));
    }
  }
  if (!saw_aggregate) throw FormatError("report: missing weighted row");
  for (const auto& t : r.tasks)
    if (t.n > 0 && (!t.rmse || !t.r2 || !t.ci)) r.aggregate.excluded_tasks = true;
  return r;
}

std::string report_table(const EvalReport& report) {
  std::ostringstream ss;
  auto row = [&](const std::string& name, std::size_t n, const std::optional<double>& a, const std::optional<double>& b,
                 const std::optional<double>& c) {
    char buf[160];
    auto f = [](const std::optional<double>& v) { return v ? *v : std::nan(""); };
    std::snprintf(buf, sizeof buf, "%-16s %8zu %10.4f %10.4f %10.4f\n", name.c_str(), n, f(a), f(b), f(c));
    ss << buf;
  };
  char head[160];
  std::snprintf(head, sizeof head, "%-16s %8s %10s %10s %10s\n", "task", "n", "rmse", "r2", "ci");
  ss << head;
  for (const auto& t : report.tasks) row(t.task, t.n, t.rmse, t.r2, t.ci);
  const auto& a = report.aggregate;
  row("weighted", a.n, a.rmse, a.r2, a.ci);
  if (a.excluded_tasks) ss << "note: tasks with undefined metrics were left out of the weighted row\n";
  return ss.str();
}

}  // namespace padme
