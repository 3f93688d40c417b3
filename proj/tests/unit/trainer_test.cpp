#include <doctest.h>

#include "padme/error.hpp"
#include "padme/trainer.hpp"
#include "support/small_model.hpp"

using namespace padme;
using padme::testing::small_config;
using padme::testing::small_world;

namespace {

std::vector<PairSample> constant_samples(std::size_t nc, std::size_t np, double value) {
  std::vector<PairSample> out;
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t p = 0; p < np; ++p) out.push_back({c, p, {value}, {1.0}});
  return out;
}

struct Setup {
  testing::SmallWorld world = small_world(10, 3, 21);
  ModelConfig cfg = small_config(Variant::PadmeEcfp);
  FeatureStore store = FeatureStore::build(cfg, world.smiles, world.proteins);
};

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("loss falls on a constant target") {
    Setup s;
    Model m(s.cfg);
    const auto samples = constant_samples(10, 3, 2.0);
    TrainConfig tc;
    tc.max_epochs = 5;
    tc.batch_size = 30;
    tc.learning_rate = 1e-3;
    const TrainResult r = train(m, s.store, samples, {}, tc);
    REQUIRE(r.history.size() == 5);
    for (std::size_t e = 1; e < 5; ++e) CHECK(r.history[e].train_loss < r.history[e - 1].train_loss);
    CHECK(r.evaluations == 0);
    CHECK_FALSE(r.best_epoch.has_value());
  }

  TEST_CASE("patience one stops after the first worse evaluation") {
    Setup s;
    Model m(s.cfg);
    const auto train_set = constant_samples(10, 3, 10.0);
    const std::vector<PairSample> validation = {{0, 0, {0.0}, {1.0}}, {1, 1, {0.0}, {1.0}}};
    TrainConfig tc;
    tc.max_epochs = 50;
    tc.patience = 1;
    tc.learning_rate = 1e-2;
    const TrainResult r = train(m, s.store, train_set, validation, tc);
    CHECK(r.evaluations == 2);
    CHECK(r.history.size() == 2);
    CHECK(r.best_epoch == 1);
    CHECK(*r.history[1].composite > *r.history[0].composite);
  }

  TEST_CASE("best state is restored") {
    Setup s;
    Model m(s.cfg);
    const auto train_set = constant_samples(10, 3, 10.0);
    const std::vector<PairSample> validation = {{0, 0, {0.0}, {1.0}}};
    TrainConfig tc;
    tc.max_epochs = 4;
    tc.patience = 10;
    tc.learning_rate = 1e-2;
    const TrainResult r = train(m, s.store, train_set, validation, tc);
    REQUIRE(r.best_epoch == 1);
    CHECK(composite_score(m, s.store, validation).value == doctest::Approx(*r.best_score).epsilon(1e-12));
  }

  TEST_CASE("perfect predictor scores minus one") {
    Setup s;
    Model m(s.cfg);
    std::vector<PairSample> samples = constant_samples(10, 3, 0.0);
    std::vector<PairRef> refs;
    for (const auto& x : samples) refs.push_back({x.compound, x.protein});
    const Tensor pred = m.predict(s.store, refs);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].target[0] = pred.at(i, 0);
    const CompositeScore score = composite_score(m, s.store, samples);
    CHECK(score.mean_rmse == 0.0);
    CHECK(score.mean_ci == 1.0);
    CHECK(score.value == -1.0);
  }

  TEST_CASE("no comparable pair falls back to rmse") {
    Setup s;
    Model m(s.cfg);
    const auto samples = constant_samples(2, 2, 3.0);
    const CompositeScore score = composite_score(m, s.store, samples);
    CHECK_FALSE(score.mean_ci.has_value());
    CHECK(score.value == score.mean_rmse);
  }

  TEST_CASE("training is deterministic under a seed") {
    Setup s;
    ModelConfig cfg = s.cfg;
    cfg.dropout = {0.3, 0.1};
    auto samples = constant_samples(10, 3, 1.0);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].target[0] = static_cast<double>(i % 7);
    TrainConfig tc;
    tc.max_epochs = 3;
    tc.batch_size = 7;
    Model a(cfg), b(cfg);
    const TrainResult ra = train(a, s.store, samples, samples, tc);
    const TrainResult rb = train(b, s.store, samples, samples, tc);
    CHECK(history_csv(ra.history) == history_csv(rb.history));
    for (std::size_t i = 0; i < a.parameters().size(); ++i)
      CHECK(a.parameters()[i]->value == b.parameters()[i]->value);
  }

  TEST_CASE("input errors") {
    Setup s;
    Model m(s.cfg);
    TrainConfig tc;
    CHECK_THROWS_AS(train(m, s.store, {}, {}, tc), DataError);
    CHECK_THROWS_AS(epoch_cost_probe(s.cfg, s.store, {}, tc), DataError);
    tc.batch_size = 0;
    const auto samples = constant_samples(2, 2, 3.0);
    CHECK_THROWS_AS(train(m, s.store, samples, {}, tc), ConfigError);
  }

  TEST_CASE("history csv") {
    std::vector<EpochRecord> h(2);
    h[0].epoch = 1;
    h[0].train_loss = 0.5;
    h[1].epoch = 2;
    h[1].train_loss = 0.25;
    h[1].val_rmse = 1.0;
    h[1].val_ci = 0.75;
    h[1].composite = 0.25;
    CHECK(history_csv(h) == "epoch,train_loss,val_rmse,val_ci,composite\n1,0.5,,,\n2,0.25,1,0.75,0.25\n");
  }

  TEST_CASE("probe measures something") {
    Setup s;
    TrainConfig tc;
    const auto samples = constant_samples(10, 3, 1.0);
    const double t = epoch_cost_probe(s.cfg, s.store, samples, tc, 3);
    CHECK(t > 0.0);
  }
}
