#include <cmath>
#include <cstdlib>
#include <random>

#include "doctest.h"
#include "fd_check.hpp"
#include "ptrgeo/dataset.hpp"
#include "ptrgeo/error.hpp"
#include "ptrgeo/models.hpp"
#include "ptrgeo/train.hpp"

using namespace ptrgeo;
using namespace ptrgeo::nn;
using ad::Tape;
using ad::Tensor;
using fdcheck::random_tensor;

namespace {

struct LstmFixture {
  ad::ParamStore store;
  LstmParams params;

  LstmFixture(std::size_t hidden, std::size_t input, std::uint64_t seed, bool zero = false) {
    std::mt19937_64 rng(seed);
    auto make = [&](const char* name, ad::Shape shape) -> const ad::Parameter* {
      Tensor t = zero ? Tensor(shape) : random_tensor(rng, shape, -0.5, 0.5);
      return &store.add(name, std::move(t));
    };
    params.w_ih = make("w_ih", {4 * hidden, input});
    params.w_hh = make("w_hh", {4 * hidden, hidden});
    params.bias = make("b", {4 * hidden});
    params.hidden = hidden;
    params.input = input;
  }
};

data::Example hull_example(std::uint64_t seed, std::size_t n) {
  data::GenSpec spec{Task::hull, 1, n, n, seed, data::TspSolver::optimal};
  return data::generate_one(spec, 0);
}

void zero_param(Model& m, const char* name) {
  for (auto& v : m.params().get(name).mutable_values()) v = 0.0;
}

}  // namespace

TEST_CASE("lstm_step") {
  SUBCASE("all-zero weights and state") {
    LstmFixture f(3, 2, 1, true);
    Tape t;
    const auto s = lstm_step(f.params, t.constant(Tensor::vector({0.4, -0.2})), lstm_zero_state(t, 3));
    for (double v : s.c.value().values()) CHECK(v == 0.0);
    for (double v : s.h.value().values()) CHECK(v == 0.0);
  }
  SUBCASE("all-zero weights with a constant cell") {
    LstmFixture f(3, 2, 1, true);
    Tape t;
    const double k = 1.3;
    LstmState s0{t.constant(Tensor({3})), t.constant(Tensor::vector({k, k, k}))};
    const auto s = lstm_step(f.params, t.constant(Tensor::vector({0.7, 0.1})), s0);
    for (double v : s.c.value().values()) CHECK(v == 0.5 * k);
    for (double v : s.h.value().values()) CHECK(v == doctest::Approx(0.5 * std::tanh(0.5 * k)).epsilon(1e-15));
  }
  SUBCASE("gradient of the squared hidden norm") {
    LstmFixture f(4, 3, 7);
    std::mt19937_64 rng(7);
    const Tensor x = random_tensor(rng, {3});
    const Tensor h0 = random_tensor(rng, {4});
    const Tensor c0 = random_tensor(rng, {4});
    auto loss_of = [&](Tape& t) {
      const auto s = lstm_step(f.params, t.constant(x), {t.constant(h0), t.constant(c0)});
      return ad::sum(ad::mul(s.h, s.h));
    };
    Tape t;
    const auto loss = loss_of(t);
    t.backward(loss);
    double worst = 0.0;
    for (std::size_t slot = 0; slot < f.store.size(); ++slot) {
      auto& p = f.store[slot];
      const Tensor analytic = t.grad(t.param(p));
      auto values = p.mutable_values();
      for (std::size_t k = 0; k < values.size(); ++k) {
        const double orig = values[k];
        values[k] = orig + 1e-5;
        Tape a;
        const double up = loss_of(a).value().item();
        values[k] = orig - 1e-5;
        Tape b;
        const double down = loss_of(b).value().item();
        values[k] = orig;
        worst = std::max(worst, fdcheck::rel_error(analytic[k], (up - down) / 2e-5));
      }
    }
    CHECK(worst < 1e-5);
  }
  SUBCASE("dimension mismatch") {
    LstmFixture f(3, 2, 1);
    Tape t;
    CHECK_THROWS_AS(lstm_step(f.params, t.constant(Tensor::vector({1, 2, 3})), lstm_zero_state(t, 3)),
                    DimensionError);
  }
}

TEST_CASE("encode") {
  const Model m = Model::create(Arch::ptrnet, Task::hull, 6, 3);
  SUBCASE("sentinel plus one state per point") {
    for (std::size_t n : {1u, 2u, 7u}) {
      std::vector<geom::Point> pts(n, {0.25, 0.75});
      Tape t;
      CHECK(m.encode(t, pts).states.size() == n + 1);
    }
  }
  SUBCASE("first state is the sentinel vector") {
    Tape t;
    const std::vector<geom::Point> pts{{0.1, 0.2}};
    CHECK(m.encode(t, pts).states[0].value() == m.params().get("sentinel").value());
  }
  SUBCASE("bit-identical across runs") {
    const std::vector<geom::Point> pts{{0.1, 0.2}, {0.9, 0.4}, {0.5, 0.5}};
    Tape a, b;
    const auto ea = m.encode(a, pts);
    const auto eb = m.encode(b, pts);
    for (std::size_t j = 0; j < ea.states.size(); ++j) {
      CHECK(ea.states[j].value() == eb.states[j].value());
    }
  }
  SUBCASE("empty input") {
    Tape t;
    CHECK_THROWS_AS(m.encode(t, std::vector<geom::Point>{}), ArgumentError);
  }
}

TEST_CASE("pointer logits and attention blend") {
  std::mt19937_64 rng(11);
  const std::size_t h = 5;
  ad::ParamStore store;
  AttentionParams a{&store.add("w1", random_tensor(rng, {h, h})),
                    &store.add("w2", random_tensor(rng, {h, h})),
                    &store.add("v", random_tensor(rng, {h}))};
  Tape t;
  std::vector<ad::Var> states;
  for (int j = 0; j < 4; ++j) states.push_back(t.constant(random_tensor(rng, {h})));
  const ad::Var d = t.constant(random_tensor(rng, {h}));

  SUBCASE("random logits give a normalized pointer distribution") {
    const auto u = pointer_logits(a, states, d);
    CHECK(u.value().size() == states.size());
    double s = 0.0;
    const Tensor probs = ad::stable_softmax(u.value());
    for (double p : probs.values()) s += p;
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  SUBCASE("two states give two logits") {
    CHECK(pointer_logits(a, std::span(states).first(2), d).value().size() == 2);
  }
  SUBCASE("v = 0 gives zero logits") {
    ad::ParamStore zs;
    AttentionParams z{a.w1, a.w2, &zs.add("v", Tensor({h}))};
    for (double u : pointer_logits(z, states, d).value().values()) CHECK(u == 0.0);
  }
  SUBCASE("single state blends to itself") {
    const auto out = attention_blend(a, std::span(states).first(1), d).value();
    REQUIRE(out.size() == 2 * h);
    for (std::size_t k = 0; k < h; ++k) CHECK(out[k] == states[0].value()[k]);
    for (std::size_t k = 0; k < h; ++k) CHECK(out[h + k] == d.value()[k]);
  }
  SUBCASE("identical states blend to that state") {
    std::vector<ad::Var> same(3, states[1]);
    const auto out = attention_blend(a, same, d).value();
    for (std::size_t k = 0; k < h; ++k) {
      CHECK(out[k] == doctest::Approx(states[1].value()[k]).epsilon(1e-14));
    }
  }
  SUBCASE("blend lies in the coordinatewise range of the states") {
    for (int trial = 0; trial < 50; ++trial) {
      const ad::Var dq = t.constant(random_tensor(rng, {h}, -3, 3));
      const auto out = attention_blend(a, states, dq).value();
      for (std::size_t k = 0; k < h; ++k) {
        double lo = 1e9, hi = -1e9;
        for (const auto& s : states) {
          lo = std::min(lo, s.value()[k]);
          hi = std::max(hi, s.value()[k]);
        }
        CHECK(out[k] >= lo - 1e-15);
        CHECK(out[k] <= hi + 1e-15);
      }
    }
  }
}

TEST_CASE("forward_nll") {
  SUBCASE("zero attention vector gives m ln(n+1)") {
    for (std::size_t n : {3u, 5u, 9u}) {
      Model m = Model::create(Arch::ptrnet, Task::hull, 8, n);
      zero_param(m, "attention.v");
      const auto ex = hull_example(n, n);
      Tape t;
      const double nll = m.forward_nll(t, ex).value().item();
      const double m_steps = static_cast<double>(ex.targets().size());
      CHECK(nll == doctest::Approx(m_steps * std::log(n + 1.0)).epsilon(1e-14));
    }
  }
  SUBCASE("strictly positive") {
    for (Arch arch : {Arch::ptrnet, Arch::seq2seq, Arch::seq2seq_attn}) {
      const Model m = Model::create(arch, Task::hull, 6, 2, 0.08, 5);
      Tape t;
      CHECK(m.forward_nll(t, hull_example(4, 5)).value().item() > 0.0);
    }
  }
  SUBCASE("targets outside [0, n] are rejected") {
    const Model m = Model::create(Arch::ptrnet, Task::hull, 4, 1);
    auto ex = hull_example(1, 4);
    ex.output[1] = 5;
    Tape t;
    CHECK_THROWS_AS(m.forward_nll(t, ex), ValidationError);
  }
  SUBCASE("delaunay and tsp examples train one token per step") {
    data::GenSpec dspec{Task::delaunay, 1, 5, 5, 3, data::TspSolver::optimal};
    const auto dex = data::generate_one(dspec, 0);
    Model m = Model::create(Arch::ptrnet, Task::delaunay, 4, 1);
    zero_param(m, "attention.v");
    Tape t;
    CHECK(m.forward_nll(t, dex).value().item() ==
          doctest::Approx((dex.output.size() + 1) * std::log(6.0)).epsilon(1e-14));
  }
}

TEST_CASE("ptrnet gradient matches finite differences (hidden 8, n 4)") {
  Model m = Model::create(Arch::ptrnet, Task::hull, 8, 21, 0.5);
  const auto ex = hull_example(21, 4);
  for (const auto& pe : fdcheck::model_param_errors(m, ex)) {
    INFO(pe.name);
    CHECK(pe.error < 1e-4);
  }
}

TEST_CASE("pointer support follows the input length") {
  const Model m = Model::create(Arch::ptrnet, Task::hull, 6, 4);
  for (std::size_t n = 3; n <= 12; ++n) {
    const auto ex = hull_example(n, n);
    Tape t;
    const auto enc = m.encode(t, ex.points);
    const auto r = m.step(t, enc, enc.final_state, m.decoder_input(t, enc, -1));
    CHECK(r.log_probs.value().size() == n + 1);
    CHECK(m.num_classes(n) == n + 1);
  }
}

TEST_CASE("fixed-dictionary baselines") {
  for (Arch arch : {Arch::seq2seq, Arch::seq2seq_attn}) {
    const Model m = Model::create(arch, Task::hull, 6, 2, 0.08, 5);
    SUBCASE("reject a foreign length") {
      Tape t;
      CHECK_THROWS_AS(m.forward_nll(t, hull_example(3, 6)), UnsupportedLengthError);
      CHECK_THROWS_AS(m.check_length(6), UnsupportedLengthError);
    }
    SUBCASE("output distribution is normalized over n + 2 classes") {
      const auto ex = hull_example(3, 5);
      Tape t;
      const auto enc = m.encode(t, ex.points);
      const auto r = m.step(t, enc, enc.final_state, m.decoder_input(t, enc, -1));
      REQUIRE(r.log_probs.value().size() == 7);
      double s = 0.0;
      for (double lp : r.log_probs.value().values()) s += std::exp(lp);
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
  CHECK_THROWS_AS(Model::create(Arch::seq2seq, Task::hull, 6, 2), ArgumentError);
}

TEST_CASE("training") {
  SUBCASE("batch of one equals forward_nll plus one sgd_step") {
    const auto ex = hull_example(5, 5);
    Model a = Model::create(Arch::ptrnet, Task::hull, 8, 9);
    Model b = a;

    HyperParams hp;
    hp.hidden = 8;
    hp.batch = 1;
    TrainOptions opt;
    opt.steps = 1;
    const std::vector<data::Example> ds{ex};
    train(a, ds, hp, opt);

    ad::Gradients g(b.params());
    Tape t;
    t.backward(b.forward_nll(t, ex), &g);
    g.scale(1.0 / static_cast<double>(ex.targets().size()));
    ad::sgd_step(b.params(), g, hp.lr, hp.clip);
    for (std::size_t s = 0; s < a.params().size(); ++s) {
      CHECK(a.params()[s].value() == b.params()[s].value());
    }
  }

  SUBCASE("same seed, same loss trace, independent of thread count") {
    data::GenSpec spec{Task::hull, 40, 4, 7, 3, data::TspSolver::optimal};
    const auto ds = data::generate(spec);
    auto run = [&](const char* threads) {
      setenv("PTRGEO_THREADS", threads, 1);
      Model m = Model::create(Arch::ptrnet, Task::hull, 8, 3);
      HyperParams hp;
      hp.hidden = 8;
      hp.batch = 16;
      TrainOptions opt;
      opt.steps = 12;
      std::vector<double> trace;
      for (const auto& r : train(m, ds, hp, opt).log) trace.push_back(r.mean_nll);
      unsetenv("PTRGEO_THREADS");
      return trace;
    };
    const auto one = run("1");
    CHECK(one == run("1"));
    CHECK(one == run("3"));
  }

  SUBCASE("resumed training sees the same batches") {
    data::GenSpec spec{Task::hull, 30, 5, 5, 8, data::TspSolver::optimal};
    const auto ds = data::generate(spec);
    HyperParams hp;
    hp.hidden = 6;
    hp.batch = 8;
    Model full = Model::create(Arch::ptrnet, Task::hull, 6, 1);
    TrainOptions all;
    all.steps = 10;
    const auto trace = train(full, ds, hp, all).log;

    Model part = Model::create(Arch::ptrnet, Task::hull, 6, 1);
    TrainOptions first;
    first.steps = 4;
    train(part, ds, hp, first);
    Model resumed = decode_checkpoint(encode_checkpoint(part));
    TrainOptions rest;
    rest.steps = 10;
    rest.start_step = 4;
    const auto tail = train(resumed, ds, hp, rest).log;
    REQUIRE(tail.size() == 6);
    for (std::size_t i = 0; i < tail.size(); ++i) {
      CHECK(tail[i].step == trace[4 + i].step);
      CHECK(tail[i].mean_nll == trace[4 + i].mean_nll);
    }
  }

  SUBCASE("overfitting one 5-point hull example") {
    const std::vector<data::Example> ds{hull_example(42, 5)};
    // A wider init than the default keeps a 16-unit model off the initial
    // plateau where every pointer is near uniform.
    Model m = Model::create(Arch::ptrnet, Task::hull, 16, 42, 0.3);
    HyperParams hp;
    hp.hidden = 16;
    hp.init_range = 0.3;
    hp.batch = 1;
    TrainOptions opt;
    opt.steps = 200;
    const auto log = train(m, ds, hp, opt).log;
    CHECK(log.back().mean_nll < 0.1 * log.front().mean_nll);
  }

  SUBCASE("task mismatch and empty data") {
    Model m = Model::create(Arch::ptrnet, Task::tsp, 4, 1);
    HyperParams hp;
    TrainOptions opt;
    opt.steps = 1;
    const std::vector<data::Example> ds{hull_example(1, 4)};
    CHECK_THROWS_AS(train(m, ds, hp, opt), ArgumentError);
    CHECK_THROWS_AS(train(m, std::span<const data::Example>{}, hp, opt), ArgumentError);
  }
}

TEST_CASE("checkpoints") {
  for (Arch arch : {Arch::ptrnet, Arch::seq2seq, Arch::seq2seq_attn}) {
    const Model m = Model::create(arch, Task::delaunay, 5, 17, 0.08, 6);
    const std::string bytes = encode_checkpoint(m);
    REQUIRE(bytes.substr(0, 4) == "PTRN");
    const Model back = decode_checkpoint(bytes);
    CHECK(back.arch() == arch);
    CHECK(back.task() == Task::delaunay);
    CHECK(back.hidden() == 5);
    CHECK(back.fixed_n() == m.fixed_n());
    CHECK(encode_checkpoint(back) == bytes);
    for (std::size_t s = 0; s < m.params().size(); ++s) {
      CHECK(back.params()[s].name() == m.params()[s].name());
      CHECK(back.params()[s].value() == m.params()[s].value());
    }
  }
  const std::string good = encode_checkpoint(Model::create(Arch::ptrnet, Task::hull, 3, 1));
  CHECK_THROWS_AS(decode_checkpoint("NOPE" + good.substr(4)), ParseError);
  CHECK_THROWS_AS(decode_checkpoint(good.substr(0, good.size() - 3)), ParseError);
}
