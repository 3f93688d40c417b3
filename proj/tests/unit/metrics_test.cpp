#include <doctest.h>

#include <cmath>

#include "padme/error.hpp"
#include "padme/metrics.hpp"
#include "padme/rng.hpp"

using namespace padme;

namespace {

using V = std::vector<double>;

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("rmse") {
    CHECK(rmse(V{1, 2, 3}, V{1, 2, 3}) == 0.0);
    CHECK(rmse(V{0, 0}, V{1, 1}) == 1.0);
    CHECK(rmse(V{0, 0}, V{3, 4}) == doctest::Approx(std::sqrt(12.5)));
    CHECK(rmse(V{0, 2}, V{3, 4}) == rmse(V{3, 4}, V{0, 2}));
    CHECK_THROWS_AS(rmse(V{}, V{}), DataError);
    CHECK_THROWS_AS(rmse(V{1}, V{1, 2}), DataError);
  }

  TEST_CASE("coefficient of determination") {
    CHECK(r2(V{1, 2, 3}, V{1, 2, 3}) == 1.0);
    CHECK(r2(V{1, 2, 3}, V{2, 2, 2}) == 0.0);
    CHECK(r2(V{1, 2, 3}, V{1, 2, 4}) == doctest::Approx(0.5));
    CHECK(r2(V{1, 2, 3}, V{3, 2, 1}) < 0.0);
    CHECK_THROWS_AS(r2(V{2, 2}, V{1, 3}), DataError);
  }

  TEST_CASE("concordance index") {
    CHECK(concordance_index(V{1, 2, 3, 4}, V{5, 5, 5, 5}) == 0.5);
    CHECK(concordance_index(V{1, 2, 3, 4}, V{0.1, 0.2, 0.3, 0.4}) == 1.0);
    CHECK(concordance_index(V{1, 2, 3, 4}, V{4, 3, 2, 1}) == 0.0);
    CHECK(concordance_index(V{1, 1, 2}, V{0, 5, 1}) == 0.5);
    CHECK_THROWS_AS(concordance_index(V{3, 3, 3}, V{1, 2, 3}), DataError);
    CHECK_FALSE(has_comparable_pair(V{3, 3}));
    CHECK(has_comparable_pair(V{3, 4}));
  }

  TEST_CASE("fast and brute force agree, and ranks are all that matter") {
    Rng rng(12);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 2 + rng.below(49);
      V y(n), yhat(n), warped(n);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<double>(rng.below(6));
        yhat[i] = static_cast<double>(rng.below(8));
        warped[i] = std::exp(yhat[i]) + 3.0;
      }
      if (!has_comparable_pair(y)) continue;
      const double fast = concordance_index(y, yhat);
      CHECK(fast == concordance_index_brute(y, yhat));
      CHECK(fast == concordance_index(y, warped));
    }
  }

  TEST_CASE("task metrics leave undefined values empty") {
    const TaskMetrics flat = task_metrics("t", V{2, 2}, V{1, 3});
    CHECK(flat.n == 2);
    CHECK(flat.rmse == 1.0);
    CHECK_FALSE(flat.r2.has_value());
    CHECK_FALSE(flat.ci.has_value());
    const TaskMetrics none = task_metrics("e", V{}, V{});
    CHECK(none.n == 0);
    CHECK_FALSE(none.rmse.has_value());
  }

  TEST_CASE("weighted aggregation") {
    CHECK(weighted_mean(V{1.0, 0.5}, std::vector<std::size_t>{2, 8}) == 0.6);
    CHECK(weighted_mean(V{0.7}, std::vector<std::size_t>{3}) == doctest::Approx(0.7));
    CHECK_THROWS_AS(weighted_mean(V{1.0}, std::vector<std::size_t>{0}), DataError);

    std::vector<TaskMetrics> tasks(2);
    tasks[0] = {"a", 2, 1.0, 0.5, 0.9};
    tasks[1] = {"b", 8, 0.5, 0.25, std::nullopt};
    const AggregateMetrics agg = aggregate(tasks);
    CHECK(agg.rmse == 0.6);
    CHECK(agg.r2 == doctest::Approx(0.3));
    CHECK(agg.ci == 0.9);
    CHECK(agg.n == 10);
    CHECK(agg.excluded_tasks);
  }

  TEST_CASE("report csv round trip") {
    EvalReport r;
    r.tasks = {task_metrics("a", V{1, 2, 3}, V{1.5, 2, 2.5}), task_metrics("b", V{4, 4}, V{4, 5})};
    r.aggregate = aggregate(r.tasks);
    const std::string csv = report_csv(r);
    CHECK(csv.rfind("task,n,rmse,r2,ci\n", 0) == 0);
    CHECK(csv.find("\nweighted,5,") != std::string::npos);
    CHECK(csv.find("nan") != std::string::npos);
    const EvalReport back = parse_report_csv(csv);
    CHECK(report_csv(back) == csv);
    CHECK_FALSE(report_table(r).empty());
    CHECK_THROWS_AS(parse_report_csv("task,n\n"), FormatError);
  }
}
