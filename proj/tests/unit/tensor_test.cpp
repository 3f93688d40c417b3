#include <doctest.h>

#include <cmath>

#include "padme/error.hpp"
#include "padme/rng.hpp"
#include "padme/tensor.hpp"
#include "support/gradcheck.hpp"

using namespace padme;

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::matrix(r, c);
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

Tensor random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  Tensor t({n}, 0.0);
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Entries bounded away from the relu kink.
Tensor off_kink(Rng& rng, std::size_t r, std::size_t c) {
  Tensor t = random_tensor(rng, r, c);
  for (auto& v : t.values()) v = v < 0 ? v - 0.05 : v + 0.05;
  return t;
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("relu forward and subgradient") {
    Parameter x("x", Tensor::vector({-1.0, 0.0, 2.0}));
    Tape tape;
    Var y = tape.relu(tape.param(x));
    Var loss = tape.sum(y);
    tape.forward();
    CHECK(tape.value(y) == Tensor::vector({0.0, 0.0, 2.0}));
    tape.backward(loss);
    CHECK(x.grad == Tensor::vector({0.0, 0.0, 1.0}));
  }

  TEST_CASE("matmul by identity") {
    Tape tape;
    Var i3 = tape.constant(Tensor::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
    const Tensor x = Tensor::from_rows({{0.5}, {-2.0}, {7.25}});
    Var y = tape.matmul(i3, tape.constant(x));
    tape.forward();
    CHECK(tape.value(y) == x);
  }

  TEST_CASE("weighted mse ignores masked entries") {
    Tape tape;
    Var loss = tape.weighted_mse(tape.constant(Tensor::vector({1, 5})), tape.constant(Tensor::vector({1, 0})),
                                 tape.constant(Tensor::vector({1, 0})));
    Var zero = tape.weighted_mse(tape.constant(Tensor::vector({1, 5})), tape.constant(Tensor::vector({1, 0})),
                                 tape.constant(Tensor::vector({0, 0})));
    tape.forward();
    CHECK(tape.value(loss)[0] == 0.0);
    CHECK(tape.value(zero)[0] == 0.0);
  }

  TEST_CASE("gradient of half squared norm is x") {
    Parameter x("x", Tensor::vector({0.3, -1.2, 4.0}));
    Tape tape;
    Var p = tape.param(x);
    Var loss = tape.scale(tape.sum(tape.mul(p, p)), 0.5);
    tape.forward();
    tape.backward(loss);
    CHECK(x.grad == x.value);
  }

  TEST_CASE("named inputs and single evaluation") {
    Tape tape;
    Var a = tape.input("a");
    Var b = tape.add(a, a);
    Var c = tape.mul(b, b);
    tape.forward({{"a", Tensor::vector({1, 2})}});
    CHECK(tape.value(c) == Tensor::vector({4, 16}));
    CHECK(tape.evaluation_count(b) == 1);
    CHECK(tape.evaluation_count(c) == 1);
    Tape unbound;
    unbound.sum(unbound.input("missing"));
    CHECK_THROWS_AS(unbound.forward(), ShapeError);
  }

  TEST_CASE("shape errors") {
    Tape tape;
    tape.matmul(tape.constant(Tensor::matrix(2, 3)), tape.constant(Tensor::matrix(2, 3)));
    CHECK_THROWS_AS(tape.forward(), ShapeError);
  }

  TEST_CASE("constant branches receive no gradient") {
    Parameter w("w", Tensor::vector({2.0}));
    Tape tape;
    Var c = tape.constant(Tensor::vector({3.0}));
    Var loss = tape.sum(tape.mul(tape.param(w), c));
    tape.forward();
    tape.backward(loss);
    CHECK(w.grad[0] == 3.0);
  }

  TEST_CASE("adam first step moves by the learning rate") {
    Parameter p("p", Tensor::vector({1.0}));
    p.grad[0] = 0.37;
    Adam adam;
    Parameter* ps[] = {&p};
    adam.step(ps);
    CHECK(p.value[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-9));
    CHECK(adam.state().step == 1);
  }

  TEST_CASE("adam with zero gradient leaves parameters alone") {
    Parameter p("p", Tensor::vector({1.5, -2.0}));
    Adam adam;
    Parameter* ps[] = {&p};
    adam.step(ps);
    CHECK(p.value == Tensor::vector({1.5, -2.0}));
    CHECK(adam.state().m[0] == Tensor::vector({0, 0}));
    CHECK(adam.state().v[0] == Tensor::vector({0, 0}));
  }

  TEST_CASE("adam converges on a quadratic and matches the recurrence") {
    Parameter p("theta", Tensor::vector({0.0}));
    AdamConfig cfg;
    cfg.learning_rate = 0.1;
    Adam adam(cfg);
    Parameter* ps[] = {&p};

    double theta = 0.0, m = 0.0, v = 0.0;
    for (int t = 1; t <= 100; ++t) {
      p.grad[0] = 2.0 * (p.value[0] - 3.0);
      adam.step(ps);
      const double g = 2.0 * (theta - 3.0);
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      const double mh = m / (1.0 - std::pow(0.9, t));
      const double vh = v / (1.0 - std::pow(0.999, t));
      theta -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    }
    CHECK(std::abs(p.value[0] - 3.0) < 0.1);
    CHECK(p.value[0] == doctest::Approx(theta).epsilon(1e-12));
  }

  TEST_CASE("adam rejects non-finite gradients without touching state") {
    Parameter p("p", Tensor::vector({1.0}));
    p.grad[0] = NAN;
    Adam adam;
    Parameter* ps[] = {&p};
    CHECK_THROWS_AS(adam.step(ps), NumericError);
    CHECK(adam.state().step == 0);
    CHECK(p.value[0] == 1.0);
  }

  TEST_CASE("dropout is reproducible and inverted") {
    Tape tape;
    Var x = tape.constant(Tensor::matrix(50, 20, 1.0));
    Var a = tape.dropout(x, 0.5, 99);
    Var b = tape.dropout(x, 0.5, 99);
    Var c = tape.dropout(x, 0.5, 100);
    tape.forward();
    CHECK(tape.value(a) == tape.value(b));
    CHECK_FALSE(tape.value(a) == tape.value(c));
    for (double v : tape.value(a).values()) CHECK((v == 0.0 || v == 2.0));
    Tape eval;
    Var e = eval.dropout(eval.constant(Tensor::matrix(2, 2, 1.0)), 0.5, 1);
    eval.forward({}, false);
    CHECK(eval.value(e) == Tensor::matrix(2, 2, 1.0));
  }

  TEST_CASE("batchnorm running statistics drive evaluation") {
    Rng rng(4);
    const Tensor x = random_tensor(rng, 16, 3, 2.0, 5.0);
    BatchNormState state(3);
    state.momentum = 0.0;
    Parameter gamma("g", Tensor({3}, 1.0));
    Parameter beta("b", Tensor({3}, 0.0));
    Tape train;
    Var yt = train.batch_norm(train.constant(x), train.param(gamma), train.param(beta), &state);
    train.forward();
    Tape eval;
    Var ye = eval.batch_norm_eval(eval.constant(x), eval.frozen(gamma), eval.frozen(beta), state);
    eval.forward({}, false);
    // With momentum 0 the running statistics are the batch statistics.
    for (std::size_t c = 0; c < 3; ++c) {
      double mean = 0;
      for (std::size_t r = 0; r < 16; ++r) mean += x.at(r, c) / 16;
      CHECK(state.running_mean[c] == doctest::Approx(mean));
    }
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(train.value(yt)[i] == doctest::Approx(eval.value(ye)[i]));
  }

  TEST_CASE("finite differences per op") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      Rng rng(seed);
      const std::size_t r = 2 + rng.below(4), c = 1 + rng.below(4), k = 1 + rng.below(4);
      Parameter a("a", random_tensor(rng, r, c));
      Parameter b("b", random_tensor(rng, c, k));
      Parameter s("s", random_tensor(rng, r, c));
      Parameter bias("bias", random_vector(rng, c));
      Parameter rl("relu_in", off_kink(rng, r, c));
      const Tensor weights = random_tensor(rng, r, k);
      const Tensor w01 = random_tensor(rng, r, c, 0.0, 1.0);
      const Tensor target = random_tensor(rng, r, c);

      Parameter* ps[] = {&a, &b, &s, &bias, &rl};
      auto res = testing::check_gradients(ps, [&](Tape& t) {
        Var va = t.param(a), vb = t.param(b), vs = t.param(s), vbias = t.param(bias), vr = t.param(rl);
        Var mm = t.mul(t.matmul(va, vb), t.constant(weights));
        Var elem = t.add(t.mul(va, vs), t.scale(t.relu(vr), -0.7));
        Var biased = t.add_bias(elem, vbias);
        Var cat = t.concat_cols(biased, t.dropout(vs, 0.3, seed));
        Var mse = t.weighted_mse(t.add(va, vs), t.constant(target), t.constant(w01));
        return t.add(t.add(t.sum(mm), t.scale(t.sum(t.mul(cat, cat)), 0.25)), mse);
      });
      INFO("seed " << seed << " worst " << res.worst);
      CHECK(res.max_error < 1e-4);
    }
  }

  TEST_CASE("finite differences through batchnorm") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      Rng rng(seed);
      Parameter x("x", random_tensor(rng, 6, 4, -2.0, 2.0));
      Parameter gamma("gamma", random_vector(rng, 4, 0.5, 1.5));
      Parameter beta("beta", random_vector(rng, 4));
      const Tensor weights = random_tensor(rng, 6, 4);
      Parameter* ps[] = {&x, &gamma, &beta};
      auto res = testing::check_gradients(ps, [&](Tape& t) {
        Var y = t.batch_norm(t.param(x), t.param(gamma), t.param(beta), nullptr);
        return t.sum(t.mul(y, t.constant(weights)));
      });
      INFO("seed " << seed << " worst " << res.worst);
      CHECK(res.max_error < 1e-4);
    }
  }
}
