#include <doctest.h>

#include "padme/config.hpp"
#include "padme/error.hpp"
#include "support/tempdir.hpp"

using namespace padme;

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const RunConfig c;
    CHECK(c.get("model.variant") == "padme-ecfp");
    CHECK(c.counts("model.hidden_layers") == std::vector<std::size_t>{256, 256});
    CHECK(c.number("split.cluster_threshold") == 0.7);
    CHECK(c.seed() == 42);
    CHECK(c.flag("model.batchnorm"));
    for (const auto& k : RunConfig::known_keys()) CHECK(c.has_key(k));
  }

  TEST_CASE("sections and comments") {
    const RunConfig c = RunConfig::parse(
        "# tiny run\n"
        "[model]\n"
        "hidden_layers = 32,16\n"
        "dropout = 0.2\n"
        "[train]\n"
        "max_epochs = 7\n"
        "run.seed = 9\n");
    CHECK(c.counts("model.hidden_layers") == std::vector<std::size_t>{32, 16});
    CHECK(c.count("train.max_epochs") == 7);
    CHECK(c.seed() == 9);
    const ModelConfig mc = c.model_config(2, {});
    CHECK(mc.dropout == std::vector<double>{0.2, 0.2});
    CHECK(mc.n_tasks == 2);
    CHECK(mc.seed == 9);
    CHECK(c.train_config().max_epochs == 7);
  }

  TEST_CASE("rejections") {
    RunConfig c;
    CHECK_THROWS_AS(c.set("model.depth", "3"), ConfigError);
    CHECK_THROWS_AS(c.set("train.batch_size", "-1"), ConfigError);
    CHECK_THROWS_AS(c.set("train.learning_rate", "fast"), ConfigError);
    CHECK_THROWS_AS(c.set("model.variant", "padme-rnn"), ConfigError);
    CHECK_THROWS_AS(c.set("split.scheme", "lukewarm"), ConfigError);
    CHECK_THROWS_AS(c.set("data.inactive_remap", "1000000"), ConfigError);
    CHECK_THROWS_WITH_AS(RunConfig::parse("[model\n"), doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_WITH_AS(RunConfig::parse("a\n"), doctest::Contains("line 1"), ConfigError);
  }

  TEST_CASE("text round trip") {
    RunConfig c;
    c.set("model.variant", "padme-graphconv");
    c.set("data.inactive_remap", "1000000:1000");
    c.set("train.learning_rate", "0.0125");
    const std::string text = c.to_text();
    CHECK(RunConfig::parse(text).to_text() == text);
    testing::TempDir dir("cfg");
    c.save(dir / "a.cfg");
    CHECK(RunConfig::load(dir / "a.cfg").to_text() == text);
    CHECK_THROWS_AS(RunConfig::load(dir / "missing.cfg"), IoError);
  }
}
