#include <doctest.h>

#include <cmath>

#include "padme/error.hpp"
#include "padme/hyperopt.hpp"

using namespace padme;

namespace {

SearchSpace line() { return SearchSpace::parse("x = continuous 0 1\n"); }

double bowl(const Point& p) { return std::pow(std::stod(p.get(0)) - 0.3, 2); }

}  // namespace

TEST_SUITE("hyperopt") {
  TEST_CASE("space parsing") {
    const SearchSpace s = SearchSpace::parse(
        "# layers and rates\n"
        "model.n_layers = integer 1 3\n"
        "\n"
        "train.learning_rate = continuous 0.0001 0.1 log\n"
        "model.readout = categorical sum|mean\n");
    REQUIRE(s.size() == 3);
    CHECK(s.dims()[0].kind == Dimension::Kind::Integer);
    CHECK(s.dims()[1].log);
    CHECK(s.dims()[2].choices == std::vector<std::string>{"sum", "mean"});
    CHECK(s.find("model.readout") == 2);
    CHECK_FALSE(s.find("nope").has_value());

    const Dimension& layers = s.dims()[0];
    CHECK(layers.render(0.0) == "1");
    CHECK(layers.render(0.5) == "2");
    CHECK(layers.render(0.999) == "3");
    CHECK(layers.snap(0.4) == doctest::Approx(0.5));
    const Dimension& lr = s.dims()[1];
    CHECK(lr.decode(0.0) == doctest::Approx(1e-4));
    CHECK(lr.decode(0.5) == doctest::Approx(std::sqrt(1e-5)));
    CHECK(s.dims()[2].render(0.7) == "mean");

    const Point p = s.point({0.9, 0.0, 0.1});
    CHECK(p.values == std::vector<std::string>{"3", "1e-04", "sum"});
    CHECK(p.unit[0] == doctest::Approx(5.0 / 6.0));

    CHECK_THROWS_AS(SearchSpace::parse("x = continuous 1 0\n"), ConfigError);
    CHECK_THROWS_AS(SearchSpace::parse("x = discrete 1 2\n"), ConfigError);
    CHECK_THROWS_AS(SearchSpace::parse("x = continuous -1 1 log\n"), ConfigError);
    CHECK_THROWS_AS(SearchSpace::parse("# nothing\n"), ConfigError);
  }

  TEST_CASE("a single trial is the best") {
    const SearchResult r = random_search(line(), bowl, 1, 3);
    REQUIRE(r.trials.size() == 1);
    CHECK(r.best == 0);
  }

  TEST_CASE("random search finds the bowl") {
    const SearchResult r = random_search(line(), bowl, 50, 11);
    CHECK(std::abs(std::stod(r.best_trial().point.get(0)) - 0.3) < 0.05);
    CHECK(trial_log_csv(line(), r) == trial_log_csv(line(), random_search(line(), bowl, 50, 11)));
  }

  TEST_CASE("failed trials are excluded") {
    int calls = 0;
    const Objective flaky = [&](const Point& p) {
      ++calls;
      if (calls == 1) throw NumericError("diverged");
      if (calls == 2) return std::nan("");
      return bowl(p);
    };
    const SearchResult r = random_search(line(), flaky, 5, 2);
    CHECK_FALSE(r.trials[0].ok);
    CHECK_FALSE(r.trials[1].ok);
    CHECK(r.trials[0].error.find("diverged") != std::string::npos);
    REQUIRE(r.best.has_value());
    CHECK(*r.best >= 2);
    CHECK(trial_log_csv(line(), r).find(",failed,nan,") != std::string::npos);
    const Objective broken = [](const Point&) -> double { throw Error("no"); };
    CHECK_THROWS(random_search(line(), broken, 3, 1).best_trial());
  }

  TEST_CASE("expected improvement") {
    CHECK(expected_improvement(1.0, 0.0, 0.5) == 0.0);
    CHECK(expected_improvement(0.5, 0.0, 0.5) == 0.0);
    CHECK(expected_improvement(0.2, 0.0, 0.5) == doctest::Approx(0.3));
    CHECK(expected_improvement(0.0, 1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
  }

  TEST_CASE("cholesky") {
    std::vector<double> a = {4, 2, 2, 3};
    REQUIRE(cholesky(a, 2));
    CHECK(a[0] == 2.0);
    CHECK(a[2] == 1.0);
    CHECK(a[3] == doctest::Approx(std::sqrt(2.0)));
    std::vector<double> bad = {1, 2, 2, 1};
    CHECK_FALSE(cholesky(bad, 2));
  }

  TEST_CASE("gaussian process interpolates") {
    GaussianProcess gp;
    const std::vector<double> y = {1.0, 0.2, 0.7};
    REQUIRE(gp.fit({{0.1}, {0.5}, {0.9}}, y));
    const auto [m, s] = gp.predict(std::vector<double>{0.5});
    CHECK(m == doctest::Approx(0.2).epsilon(1e-3));
    CHECK(s < 0.05);
    const auto far = gp.predict(std::vector<double>{0.3});
    CHECK(far.second > s);

    GaussianProcess dup;
    const std::vector<double> y2 = {1.0, 1.0, 0.5};
    CHECK(dup.fit({{0.4}, {0.4}, {0.8}}, y2));
    CHECK(dup.jitter() >= GaussianProcess::kInitialJitter);
  }

  TEST_CASE("gp search starts like random search and is deterministic") {
    const SearchResult rnd = random_search(line(), bowl, 10, 5);
    GpSearchOptions opt;
    opt.candidates = 256;
    const SearchResult gp = gp_ei_search(line(), bowl, 10, 5, opt);
    for (std::size_t i = 0; i < opt.n_init; ++i) CHECK(gp.trials[i].point.unit == rnd.trials[i].point.unit);
    CHECK(gp.trials[opt.n_init].source == "ei");
    CHECK(trial_log_csv(line(), gp) == trial_log_csv(line(), gp_ei_search(line(), bowl, 10, 5, opt)));
    CHECK_THROWS_AS(gp_ei_search(line(), bowl, 5, 1), ConfigError);
  }

  TEST_CASE("gp search on a discrete space") {
    const SearchSpace s = SearchSpace::parse("n = integer 1 4\nc = categorical a|b|c\n");
    const Objective f = [](const Point& p) { return std::abs(std::stod(p.get(0)) - 3.0) + (p.get(1) == "b" ? 0 : 1); };
    GpSearchOptions opt;
    opt.candidates = 64;
    const SearchResult r = gp_ei_search(s, f, 20, 3, opt);
    CHECK(r.best_trial().objective == 0.0);
  }
}
