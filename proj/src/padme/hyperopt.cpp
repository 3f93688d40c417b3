#include "padme/hyperopt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/log.hpp"
#include "padme/rng.hpp"

namespace padme {

double Dimension::decode(double u) const {
  u = std::clamp(u, 0.0, std::nextafter(1.0, 0.0));
  switch (kind) {
    case Kind::Continuous:
      if (log) return lo * std::pow(hi / lo, u);
      return lo + u * (hi - lo);
    case Kind::Integer: return lo + std::floor(u * (hi - lo + 1.0));
    case Kind::Categorical: return std::floor(u * static_cast<double>(choices.size()));
  }
  return 0.0;
}

double Dimension::snap(double u) const {
  u = std::clamp(u, 0.0, std::nextafter(1.0, 0.0));
  const double bins = kind == Kind::Integer ? hi - lo + 1.0 : static_cast<double>(choices.size());
  if (kind == Kind::Continuous) return u;
  return (std::floor(u * bins) + 0.5) / bins;
}

std::string Dimension::render(double u) const {
  const double v = decode(u);
  switch (kind) {
    case Kind::Continuous: return io::format_double(v);
    case Kind::Integer: return std::to_string(static_cast<long long>(v));
    case Kind::Categorical: return choices.at(static_cast<std::size_t>(v));
  }
  return {};
}

SearchSpace::SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  for (const auto& d : dims_) {
    if (d.name.empty()) throw ConfigError("search space: unnamed dimension");
    if (d.kind == Dimension::Kind::Categorical) {
      if (d.choices.empty()) throw ConfigError("search space: '" + d.name + "' has no choices");
    } else {
      if (!(d.lo < d.hi)) throw ConfigError("search space: '" + d.name + "' needs lo < hi");
      if (d.log && d.lo <= 0.0) throw ConfigError("search space: '" + d.name + "' log scale needs lo > 0");
    }
  }
  if (dims_.empty()) throw ConfigError("search space has no dimensions");
}

SearchSpace SearchSpace::parse(std::string_view text) {
  std::vector<Dimension> dims;
  std::size_t line_no = 0;
  for (const auto& raw : io::split(text, '\n')) {
    ++line_no;
    const auto line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto where = "search space line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected `name = kind ...`");
    Dimension d;
    d.name = std::string(io::trim(line.substr(0, eq)));
    std::istringstream rest{std::string(line.substr(eq + 1))};
    std::string kind;
    rest >> kind;
    if (kind == "continuous" || kind == "integer") {
      d.kind = kind == "continuous" ? Dimension::Kind::Continuous : Dimension::Kind::Integer;
      if (!(rest >> d.lo >> d.hi)) throw ConfigError(where + "expected LO HI");
      std::string flag;
      if (rest >> flag) {
        if (flag != "log" || d.kind != Dimension::Kind::Continuous) throw ConfigError(where + "unexpected '" + flag + "'");
        d.log = true;
      }
      if (d.kind == Dimension::Kind::Integer && (d.lo != std::floor(d.lo) || d.hi != std::floor(d.hi)))
        throw ConfigError(where + "integer bounds must be whole numbers");
    } else if (kind == "categorical") {
      d.kind = Dimension::Kind::Categorical;
      std::string choices;
      rest >> choices;
      for (const auto& c : io::split(choices, '|'))
        if (!c.empty()) d.choices.push_back(c);
    } else {
      throw ConfigError(where + "unknown dimension kind '" + kind + "'");
    }
    dims.push_back(std::move(d));
  }
  return SearchSpace(std::move(dims));
}

SearchSpace SearchSpace::load(const std::filesystem::path& path) { return parse(io::read_text(path)); }

Point SearchSpace::point(std::vector<double> unit) const {
  if (unit.size() != dims_.size()) throw ShapeError("point dimension mismatch");
  Point p;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    unit[i] = dims_[i].snap(unit[i]);
    p.values.push_back(dims_[i].render(unit[i]));
  }
  p.unit = std::move(unit);
  return p;
}

std::optional<std::size_t> SearchSpace::find(std::string_view name) const {
  for (std::size_t i = 0; i < dims_.size(); ++i)
    if (dims_[i].name == name) return i;
  return std::nullopt;
}

const Trial& SearchResult::best_trial() const {
  if (!best) throw Error("no successful trial");
  return trials.at(*best);
}

namespace {

std::vector<double> sample_unit(Rng& rng, std::size_t d) {
  std::vector<double> u(d);
  for (double& v : u) v = rng.uniform();
  return u;
}

void run_trial(SearchResult& r, const Objective& f, Point p, std::string source) {
  Trial t;
  t.index = r.trials.size();
  t.source = std::move(source);
  t.point = std::move(p);
  try {
    t.objective = f(t.point);
    t.ok = std::isfinite(t.objective);
    if (!t.ok) t.error = "non-finite objective";
  } catch (const std::exception& e) {
    t.ok = false;
    t.error = e.what();
  }
  if (!t.ok) log_warn("trial " + std::to_string(t.index) + " failed: " + t.error);
  if (t.ok && (!r.best || t.objective < r.trials[*r.best].objective)) r.best = t.index;
  r.trials.push_back(std::move(t));
}

}  // namespace

SearchResult random_search(const SearchSpace& space, const Objective& f, std::size_t budget, std::uint64_t seed) {
  if (budget == 0) throw ConfigError("search budget must be at least 1");
  SearchResult r;
  Rng rng(derive_seed(seed, 0));
  for (std::size_t i = 0; i < budget; ++i) run_trial(r, f, space.point(sample_unit(rng, space.size())), "random");
  return r;
}

bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l;
    }
    for (std::size_t i = 0; i < j; ++i) a[i * n + j] = 0.0;
  }
  return true;
}

const std::vector<double>& GaussianProcess::lengthscale_grid() {
  static const std::vector<double> grid = {0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
  return grid;
}

double GaussianProcess::kernel(std::span<const double> a, std::span<const double> b) const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-0.5 * d2 / (lengthscale_ * lengthscale_));
}

bool GaussianProcess::fit_fixed(std::vector<std::vector<double>> x, std::span<const double> y, double lengthscale) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) throw DataError("gaussian process needs matching non-empty inputs");
  x_ = std::move(x);
  lengthscale_ = lengthscale;
  mean_ = 0.0;
  for (double v : y) mean_ += v;
  mean_ /= static_cast<double>(n);
  double var = 0.0;
  for (double v : y) var += (v - mean_) * (v - mean_);
  scale_ = n > 1 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
  if (!(scale_ > 0.0)) scale_ = 1.0;
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = (y[i] - mean_) / scale_;

  for (double jitter = kInitialJitter; jitter <= kMaxJitter * 1.0000001; jitter *= 10.0) {
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) k[i * n + j] = kernel(x_[i], x_[j]) + (i == j ? jitter : 0.0);
    if (!cholesky(k, n)) continue;
    // alpha = K^-1 z through forward then back substitution.
    std::vector<double> w(z);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) w[i] -= k[i * n + j] * w[j];
      w[i] /= k[i * n + i];
    }
    double lml = 0.0;
    for (std::size_t i = 0; i < n; ++i) lml -= 0.5 * w[i] * w[i] + std::log(k[i * n + i]);
    lml -= 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n; ++j) w[ii] -= k[j * n + ii] * w[j];
      w[ii] /= k[ii * n + ii];
    }
    chol_ = std::move(k);
    alpha_ = std::move(w);
    jitter_ = jitter;
    lml_ = lml;
    return true;
  }
  return false;
}

bool GaussianProcess::fit(std::vector<std::vector<double>> x, std::span<const double> y) {
  std::optional<double> best_ls;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double ls : lengthscale_grid()) {
    if (fit_fixed(x, y, ls) && lml_ > best_lml) {
      best_lml = lml_;
      best_ls = ls;
    }
  }
  if (!best_ls) return false;
  return fit_fixed(std::move(x), y, *best_ls);
}

std::pair<double, double> GaussianProcess::predict(std::span<const double> x) const {
  const std::size_t n = x_.size();
  std::vector<double> ks(n);
  for (std::size_t i = 0; i < n; ++i) ks[i] = kernel(x, x_[i]);
  double mu = 0.0;
  for (std::size_t i = 0; i < n; ++i) mu += ks[i] * alpha_[i];
  std::vector<double> v(ks);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) v[i] -= chol_[i * n + j] * v[j];
    v[i] /= chol_[i * n + i];
  }
  double var = 1.0;
  for (double e : v) var -= e * e;
  return {mean_ + scale_ * mu, scale_ * std::sqrt(std::max(var, 0.0))};
}

double expected_improvement(double mean, double sd, double best) {
  const double imp = best - mean;
  if (!(sd > 0.0)) return std::max(imp, 0.0);
  const double z = imp / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(imp * cdf + sd * pdf, 0.0);
}

SearchResult gp_ei_search(const SearchSpace& space, const Objective& f, std::size_t budget, std::uint64_t seed,
                          const GpSearchOptions& options) {
  if (options.n_init == 0 || budget <= options.n_init)
    throw ConfigError("gp search needs 1 <= n_init < budget");
  if (options.candidates == 0) throw ConfigError("gp search needs at least one candidate");
  SearchResult r;
  Rng init(derive_seed(seed, 0));
  Rng pool(derive_seed(seed, 1));
  for (std::size_t i = 0; i < options.n_init; ++i) run_trial(r, f, space.point(sample_unit(init, space.size())), "init");

  while (r.trials.size() < budget) {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (const auto& t : r.trials)
      if (t.ok) {
        x.push_back(t.point.unit);
        y.push_back(t.objective);
      }
    GaussianProcess gp;
    std::vector<std::vector<double>> cands(options.candidates);
    for (auto& c : cands) c = space.point(sample_unit(pool, space.size())).unit;
    if (x.empty() || !gp.fit(x, y)) {
      log_warn("gaussian process fit failed; sampling at random this iteration");
      run_trial(r, f, space.point(sample_unit(init, space.size())), "fallback");
      continue;
    }
    const double best = r.trials[*r.best].objective;
    std::size_t pick = 0;
    double pick_ei = -1.0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const auto [mu, sd] = gp.predict(cands[c]);
      const double ei = expected_improvement(mu, sd, best);
      if (ei > pick_ei) {
        pick_ei = ei;
        pick = c;
      }
    }
    run_trial(r, f, space.point(cands[pick]), "ei");
  }
  return r;
}

std::string trial_log_csv(const SearchSpace& space, const SearchResult& r) {
  std::string out = "trial,source,status,objective";
  for (const auto& d : space.dims()) out += "," + d.name;
  out += "\n";
  for (const auto& t : r.trials) {
    out += std::to_string(t.index) + "," + t.source + "," + (t.ok ? "ok" : "failed") + "," +
           (t.ok ? io::format_double(t.objective) : std::string("nan"));
    for (const auto& v : t.point.values) out += "," + v;
    out += "\n";
  }
  return out;
}

}  // namespace padme
