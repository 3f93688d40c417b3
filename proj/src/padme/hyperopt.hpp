#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace padme {

struct Dimension {
  enum class Kind { Continuous, Integer, Categorical };
  std::string name;
  Kind kind = Kind::Continuous;
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  std::vector<std::string> choices;

  // Maps u in [0, 1) to a value; discrete kinds return the index or integer.
  double decode(double u) const;
  // Canonical position of u: the bin center for discrete kinds.
  double snap(double u) const;
  std::string render(double u) const;
};

struct Point {
  std::vector<double> unit;
  std::vector<std::string> values;  // rendered per dimension

  const std::string& get(std::size_t i) const { return values.at(i); }
};

// Text format, one dimension per line:
//   name = continuous LO HI [log]
//   name = integer LO HI
//   name = categorical a|b|c
// Blank lines and lines starting with '#' are ignored.
class SearchSpace {
 public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<Dimension> dims);
  static SearchSpace parse(std::string_view text);
  static SearchSpace load(const std::filesystem::path& path);

  const std::vector<Dimension>& dims() const { return dims_; }
  std::size_t size() const { return dims_.size(); }
  Point point(std::vector<double> unit) const;
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<Dimension> dims_;
};

struct Trial {
  std::size_t index = 0;
  std::string source;  // init, random, ei, fallback
  Point point;
  double objective = 0.0;
  bool ok = false;
  std::string error;
};

struct SearchResult {
  std::vector<Trial> trials;
  std::optional<std::size_t> best;  // index of the lowest successful trial

  const Trial& best_trial() const;
};

// A failed objective throws or returns a non-finite value.
using Objective = std::function<double(const Point&)>;

SearchResult random_search(const SearchSpace& space, const Objective& f, std::size_t budget, std::uint64_t seed);

struct GpSearchOptions {
  std::size_t n_init = 5;
  std::size_t candidates = 1024;
};

// The first n_init points are identical to random_search with the same seed.
SearchResult gp_ei_search(const SearchSpace& space, const Objective& f, std::size_t budget, std::uint64_t seed,
                          const GpSearchOptions& options = {});

// In-place lower Cholesky factor of a symmetric n x n row-major matrix.
// Returns false if the matrix is not positive definite.
bool cholesky(std::vector<double>& a, std::size_t n);

// Gaussian process with a squared-exponential kernel on standardized targets.
class GaussianProcess {
 public:
  static constexpr double kInitialJitter = 1e-8;
  static constexpr double kMaxJitter = 1e-2;
  static const std::vector<double>& lengthscale_grid();

  // Tries every grid lengthscale and keeps the best marginal likelihood.
  // Returns false if no factorization succeeds at any jitter level.
  bool fit(std::vector<std::vector<double>> x, std::span<const double> y);
  bool fit_fixed(std::vector<std::vector<double>> x, std::span<const double> y, double lengthscale);

  // Posterior mean and standard deviation in original units.
  std::pair<double, double> predict(std::span<const double> x) const;
  double lengthscale() const { return lengthscale_; }
  double jitter() const { return jitter_; }
  double log_marginal_likelihood() const { return lml_; }

 private:
  double kernel(std::span<const double> a, std::span<const double> b) const;

  std::vector<std::vector<double>> x_;
  std::vector<double> chol_;
  std::vector<double> alpha_;
  double mean_ = 0.0, scale_ = 1.0;
  double lengthscale_ = 0.2, jitter_ = kInitialJitter, lml_ = 0.0;
};

// Expected improvement below `best`.
double expected_improvement(double mean, double sd, double best);

// trial,source,status,objective,<dimension names...>
std::string trial_log_csv(const SearchSpace& space, const SearchResult& r);

}  // namespace padme
