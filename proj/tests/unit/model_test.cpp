#include <doctest.h>

#include "padme/error.hpp"
#include "padme/io.hpp"
#include "padme/model.hpp"
#include "support/gradcheck.hpp"
#include "support/small_model.hpp"
#include "support/tempdir.hpp"

using namespace padme;
using padme::testing::small_config;
using padme::testing::small_world;

namespace {

std::vector<PairRef> all_pairs(std::size_t nc, std::size_t np) {
  std::vector<PairRef> out;
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t p = 0; p < np; ++p) out.push_back({c, p});
  return out;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("widths") {
    ModelConfig cfg;
    cfg.n_tasks = 1;
    Model m(cfg);
    CHECK(m.input_width() == 2048 + 8421);
    CHECK(m.output_width() == 1);
    cfg.n_tasks = 61;
    CHECK(Model(cfg).output_width() == 61);

    ModelConfig co = small_config(Variant::CompoundOnlyEcfp, 2);
    co.protein_vocabulary = {"P0", "P1", "P2"};
    Model only(co);
    CHECK(only.input_width() == 512);
    CHECK(only.output_width() == 6);
  }

  TEST_CASE("config validation") {
    ModelConfig cfg = small_config(Variant::PadmeEcfp);
    cfg.ecfp_bits = 1000;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config(Variant::PadmeEcfp);
    cfg.dropout = {0.5};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config(Variant::CompoundOnlyEcfp);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(parse_variant("padme-rnn"), ConfigError);
    for (Variant v : {Variant::PadmeEcfp, Variant::PadmeGraphConv, Variant::CompoundOnlyEcfp,
                      Variant::CompoundOnlyGraphConv})
      CHECK(parse_variant(variant_name(v)) == v);
  }

  TEST_CASE("config text round trip") {
    ModelConfig cfg = small_config(Variant::CompoundOnlyGraphConv, 3);
    cfg.protein_vocabulary = {"A1", "B2"};
    cfg.dropout = {0.25, 0.125};
    cfg.mean_readout = true;
    cfg.seed = 1234567890123ULL;
    const ModelConfig back = ModelConfig::from_text(cfg.to_text());
    CHECK(back.to_text() == cfg.to_text());
    CHECK(back.protein_vocabulary == cfg.protein_vocabulary);
    CHECK(back.dropout == cfg.dropout);
  }

  TEST_CASE("zero parameters predict the output bias") {
    const auto w = small_world(4, 3, 1);
    ModelConfig cfg = small_config(Variant::PadmeEcfp, 2);
    Model m(cfg);
    const FeatureStore store = FeatureStore::build(cfg, w.smiles, w.proteins);
    for (Parameter* p : m.parameters()) p->value.fill(0.0);
    Parameter* bias = nullptr;
    for (Parameter* p : m.parameters())
      if (p->name == "output.b") bias = p;
    REQUIRE(bias);
    bias->value[0] = 1.25;
    bias->value[1] = -0.5;
    const Tensor pred = m.predict(store, all_pairs(4, 3));
    for (std::size_t r = 0; r < pred.rows(); ++r) {
      CHECK(pred.at(r, 0) == 1.25);
      CHECK(pred.at(r, 1) == -0.5);
    }
  }

  TEST_CASE("evaluation is deterministic and batch independent") {
    const auto w = small_world(6, 2, 2);
    for (Variant v : {Variant::PadmeEcfp, Variant::PadmeGraphConv}) {
      ModelConfig cfg = small_config(v);
      const FeatureStore store = FeatureStore::build(cfg, w.smiles, w.proteins);
      Model a(cfg), b(cfg);
      const auto pairs = all_pairs(6, 2);
      const Tensor pa = a.predict(store, pairs);
      CHECK(pa == b.predict(store, pairs));
      CHECK(pa == a.predict(store, pairs, 5));
      const PairRef twice[] = {{1, 1}, {1, 1}};
      const Tensor t = a.predict(store, twice);
      CHECK(t.at(0, 0) == t.at(1, 0));
    }
  }

  TEST_CASE("featurization mismatch is rejected") {
    const auto w = small_world(3, 2, 3);
    ModelConfig cfg = small_config(Variant::PadmeEcfp);
    ModelConfig other = cfg;
    other.ecfp_radius = 3;
    const FeatureStore store = FeatureStore::build(other, w.smiles, w.proteins);
    Model m(cfg);
    CHECK_THROWS_WITH_AS(m.predict(store, all_pairs(3, 2)), doctest::Contains("featurization mismatch"), DataError);
  }

  TEST_CASE("PADME handles unseen proteins, compound-only does not") {
    const auto train_world = small_world(3, 2, 4);
    auto unseen = small_world(3, 3, 5);
    unseen.proteins[2].id = "NEW";
    ModelConfig cfg = small_config(Variant::PadmeEcfp);
    Model padme_model(cfg);
    const FeatureStore store = FeatureStore::build(cfg, unseen.smiles, unseen.proteins);
    CHECK(padme_model.predict(store, all_pairs(3, 3)).all_finite());

    ModelConfig co = small_config(Variant::CompoundOnlyEcfp);
    co.protein_vocabulary = {train_world.proteins[0].id, train_world.proteins[1].id};
    Model only(co);
    const FeatureStore co_store = FeatureStore::build(co, unseen.smiles, unseen.proteins);
    CHECK_THROWS_WITH_AS(only.predict(co_store, all_pairs(3, 3)), doctest::Contains("NEW"), DataError);
  }

  TEST_CASE("masked tasks contribute no gradient") {
    const auto w = small_world(4, 2, 6);
    ModelConfig cfg = small_config(Variant::PadmeEcfp, 2);
    Model m(cfg);
    const FeatureStore store = FeatureStore::build(cfg, w.smiles, w.proteins);
    std::vector<PairSample> samples;
    for (const PairRef& p : all_pairs(4, 2)) samples.push_back({p.compound, p.protein, {5.0, 0.0}, {1.0, 0.0}});
    std::vector<PairRef> refs;
    std::vector<const PairSample*> ptrs;
    for (const auto& s : samples) {
      refs.push_back({s.compound, s.protein});
      ptrs.push_back(&s);
    }
    const BatchInput batch = m.make_batch(store, refs);
    const auto [target, weight] = m.make_targets(batch, ptrs);
    zero_grads(m.parameters());
    Tape tape;
    Var loss = tape.weighted_mse(m.forward_train(tape, batch, 1), tape.constant(target), tape.constant(weight));
    tape.forward();
    tape.backward(loss);
    for (Parameter* p : m.parameters()) {
      if (p->name == "output.w")
        for (std::size_t r = 0; r < p->grad.rows(); ++r) CHECK(p->grad.at(r, 1) == 0.0);
      if (p->name == "output.b") {
        CHECK(p->grad[1] == 0.0);
        CHECK(p->grad[0] != 0.0);
      }
    }
  }

  TEST_CASE("compound-only output blocks follow the protein") {
    const auto w = small_world(3, 2, 7);
    ModelConfig co = small_config(Variant::CompoundOnlyEcfp, 1);
    co.protein_vocabulary = {w.proteins[0].id, w.proteins[1].id};
    Model m(co);
    const FeatureStore store = FeatureStore::build(co, w.smiles, w.proteins);
    for (Parameter* p : m.parameters()) p->value.fill(0.0);
    for (Parameter* p : m.parameters())
      if (p->name == "output.b") {
        p->value[0] = 1.0;
        p->value[1] = 2.0;
      }
    const Tensor pred = m.predict(store, all_pairs(3, 2));
    REQUIRE(pred.cols() == 1);
    for (std::size_t r = 0; r < pred.rows(); ++r) CHECK(pred.at(r, 0) == (r % 2 == 0 ? 1.0 : 2.0));
  }

  TEST_CASE("training and evaluation batchnorm agree once statistics settle") {
    const auto w = small_world(8, 2, 8);
    ModelConfig cfg = small_config(Variant::PadmeEcfp);
    Model m(cfg);
    const FeatureStore store = FeatureStore::build(cfg, w.smiles, w.proteins);
    for (auto& bn : m.batchnorm_states()) bn.momentum = 0.0;
    const auto pairs = all_pairs(8, 2);
    const BatchInput batch = m.make_batch(store, pairs);
    Tape train;
    Var yt = m.forward_train(train, batch, 0);
    train.forward();
    Tape eval;
    Var ye = m.forward_eval(eval, batch);
    eval.forward({}, false);
    for (std::size_t i = 0; i < train.value(yt).size(); ++i)
      CHECK(train.value(yt)[i] == doctest::Approx(eval.value(ye)[i]).epsilon(1e-9));
  }

  TEST_CASE("gradients through the graph model") {
    const auto w = small_world(3, 2, 9);
    ModelConfig cfg = small_config(Variant::PadmeGraphConv);
    cfg.dropout = {0.2, 0.0};
    Model m(cfg);
    const FeatureStore store = FeatureStore::build(cfg, w.smiles, w.proteins);
    const auto pairs = all_pairs(3, 2);
    const BatchInput batch = m.make_batch(store, pairs);
    Tensor target = Tensor::matrix(pairs.size(), 1, 6.0);
    Tensor weight = Tensor::matrix(pairs.size(), 1, 1.0);
    auto res = testing::check_gradients(
        m.parameters(),
        [&](Tape& t) {
          return t.weighted_mse(m.forward_train(t, batch, 77), t.constant(target), t.constant(weight));
        },
        1e-5, 40);
    INFO("worst " << res.worst);
    CHECK(res.max_error < 1e-4);
  }

  TEST_CASE("checkpoint round trip") {
    testing::TempDir dir("ckpt");
    const auto w = small_world(4, 2, 10);
    ModelConfig cfg = small_config(Variant::PadmeGraphConv, 2);
    Model m(cfg);
    AdamState adam;
    adam.step = 3;
    for (const Parameter* p : std::as_const(m).parameters()) {
      adam.m.push_back(Tensor(p->value.shape(), 0.5));
      adam.v.push_back(Tensor(p->value.shape(), 0.25));
    }
    save_checkpoint(dir / "a.ckpt", m, adam, "run.seed = 42\n");
    const Checkpoint ck = load_checkpoint(dir / "a.ckpt");
    CHECK(ck.run_config == "run.seed = 42\n");
    CHECK(ck.adam.step == 3);
    save_checkpoint(dir / "b.ckpt", ck.model, ck.adam, ck.run_config);
    CHECK(io::read_bytes(dir / "a.ckpt") == io::read_bytes(dir / "b.ckpt"));

    const FeatureStore store = FeatureStore::build(cfg, w.smiles, w.proteins);
    CHECK(m.predict(store, all_pairs(4, 2)) == ck.model.predict(store, all_pairs(4, 2)));

    auto bytes = io::read_bytes(dir / "a.ckpt");
    auto trailing = bytes;
    trailing.push_back(1);
    CHECK_THROWS_AS(decode_checkpoint(trailing), FormatError);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bad_magic), FormatError);
    auto bad_version = bytes;
    bad_version[8] = 9;
    CHECK_THROWS_WITH_AS(decode_checkpoint(bad_version), doctest::Contains("version"), FormatError);
    bytes.resize(bytes.size() / 2);
    CHECK_THROWS_AS(decode_checkpoint(bytes), FormatError);
  }
}
