// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "rsad/data.hpp"
#include "rsad/error.hpp"
#include "rsad/objective.hpp"
#include "rsad/training.hpp"

using namespace rsad;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.m = 3;
  c.w = 8;
  c.h = 2;
  c.d = 5;
  c.mlp_hidden = {4};
  return c;
}

std::vector<WindowSample> sine_windows(std::size_t stride) {
  SynthSpec spec;
  spec.channels = 3;
  spec.length = 400;
  const SeriesSet s = synth_generate(spec, 11);
  return make_windows(s, 8, 2, stride);
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
  const auto ba = a.blocks();
  const auto bb = b.blocks();
  if (ba.size() != bb.size()) return false;
  for (std::size_t i = 0; i < ba.size(); ++i) {
    if (!(*ba[i].second == *bb[i].second)) return false;
  }
  return true;
}

double global_norm(const ModelParams& g) {
  double s = 0.0;
  for (const auto& [name, m] : g.blocks()) {
    for (double v : m->values()) s += v * v;
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("loss breakdown") {
  const Mat x{{1, 2}, {3, 4}};
  const Mat f{{0.5}, {-1}};
  const LossWeights w;

  const LossBreakdown perfect = loss(x, x, f, f, f, w);
  CHECK(perfect.total == 0.0);

  const Mat xr{{1, 2}, {3, 5}};    // rec = 1
  const Mat h1{{2.5}, {-1}};       // p1 = 2
  const Mat h2{{0.5}, {2}};        // p2 = 3
  const LossBreakdown b = loss(x, xr, f, h1, h2, w);
  CHECK(b.rec == 1.0);
  CHECK(b.p1 == 2.0);
  CHECK(b.p2 == 3.0);
  CHECK(b.total == 6.0);
  CHECK(loss(x, xr, f, h1, h2, {1, 0, 0}).total == b.rec);
  CHECK_THROWS_AS(loss(x, Mat(2, 3), f, f, f, w), ShapeError);

  SUBCASE("total equals the weighted components on random inputs") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
      const LossWeights lw{u(rng), u(rng), u(rng)};
      const LossBreakdown r = loss(oracle::random_mat(3, 6, rng), oracle::random_mat(3, 6, rng),
                                   oracle::random_mat(3, 2, rng), oracle::random_mat(3, 2, rng),
                                   oracle::random_mat(3, 2, rng), lw);
      CHECK(std::abs(r.total - (lw.alpha * r.rec + lw.beta * r.p1 + lw.gamma * r.p2)) < 1e-12);
    }
  }

  SUBCASE("weight validation") {
    CHECK_THROWS_AS(LossWeights({0, 0, 0}).validate(), ConfigError);
    CHECK_THROWS_AS(LossWeights({-1, 1, 1}).validate(), ConfigError);
    CHECK_NOTHROW(LossWeights({0, 0, 2}).validate());
  }
}

TEST_CASE("batch_gradient is the mean of per-window gradients") {
  const ModelParams p = ModelParams::initialize(tiny_config(), 2);
  const auto ws = sine_windows(40);
  REQUIRE(ws.size() >= 3);
  const std::span<const WindowSample> batch(ws.data(), 3);
  const LossAndGradient got = batch_gradient(p, batch, {});

  ModelParams sum = ModelParams::zeros(p.config);
  double total = 0.0;
  for (const auto& w : batch) {
    const LossAndGradient one = loss_and_gradient(p, w.x, w.x_f, {});
    total += one.loss.total;
    auto dst = sum.blocks();
    const auto src = one.grad.blocks();
    for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].second += *src[i].second;
  }
  CHECK(std::abs(got.loss.total - total / 3.0) < 1e-12);
  const auto g = got.grad.blocks();
  const auto s = sum.blocks();
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t k = 0; k < g[i].second->size(); ++k) {
      CHECK(std::abs((*g[i].second)[k] - (*s[i].second)[k] / 3.0) < 1e-12);
    }
  }
}

TEST_CASE("clip_global_norm") {
  ModelParams g = ModelParams::initialize(tiny_config(), 3);
  const double before = global_norm(g);
  REQUIRE(before > 1.0);
  CHECK(clip_global_norm(g, 0.5) == doctest::Approx(before));
  CHECK(global_norm(g) == doctest::Approx(0.5).epsilon(1e-12));

  ModelParams h = ModelParams::initialize(tiny_config(), 3);
  const ModelParams copy = h;
  clip_global_norm(h, before * 2);
  CHECK(params_equal(h, copy));
  clip_global_norm(h, 0.0);
  CHECK(params_equal(h, copy));
}

TEST_CASE("Adam first step moves each weight by about lr against its gradient sign") {
  ModelParams p = ModelParams::initialize(tiny_config(), 4);
  const ModelParams start = p;
  ModelParams g = ModelParams::initialize(tiny_config(), 5);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  Adam opt(p, cfg);
  opt.step(p, g);
  CHECK(opt.steps_taken() == 1);
  const auto pb = p.blocks();
  const auto sb = start.blocks();
  const auto gb = g.blocks();
  for (std::size_t i = 0; i < pb.size(); ++i) {
    for (std::size_t k = 0; k < pb[i].second->size(); ++k) {
      const double gv = (*gb[i].second)[k];
      const double want = (*sb[i].second)[k] - 0.01 * gv / (std::abs(gv) + cfg.epsilon);
      CHECK(std::abs((*pb[i].second)[k] - want) < 1e-12);
    }
  }
}

TEST_CASE("a small gradient step decreases the loss on a fixed batch") {
  const auto ws = sine_windows(16);
  const std::span<const WindowSample> batch(ws.data(), std::min<std::size_t>(ws.size(), 8));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ModelParams p = ModelParams::initialize(tiny_config(), seed);
    const LossAndGradient lg = batch_gradient(p, batch, {});
    bool decreased = false;
    for (double lr : {1e-3, 1e-4, 1e-5}) {
      ModelParams q = p;
      auto qb = q.blocks();
      const auto gb = lg.grad.blocks();
      for (std::size_t i = 0; i < qb.size(); ++i) {
        for (std::size_t k = 0; k < qb[i].second->size(); ++k) (*qb[i].second)[k] -= lr * (*gb[i].second)[k];
      }
      decreased = decreased || evaluate_loss(q, batch, {}).total < lg.loss.total;
    }
    CHECK(decreased);
  }
}

TEST_CASE("fit") {
  const auto train = sine_windows(4);
  const auto val = sine_windows(13);
  const ModelParams init = ModelParams::initialize(tiny_config(), 7);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 8;

  SUBCASE("learning rate 0 leaves parameters unchanged") {
    cfg.learning_rate = 0.0;
    cfg.patience = 0;
    const FitResult r = fit(init, train, {}, {}, cfg);
    CHECK(params_equal(r.params, init));
    CHECK(r.history.size() == 4);
  }

  SUBCASE("same seed and data give a bit-identical history") {
    std::size_t calls = 0;
    const FitResult a = fit(init, train, val, {}, cfg, [&](const EpochRecord&) { ++calls; });
    const FitResult b = fit(init, train, val, {}, cfg);
    CHECK(calls == 4);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
      CHECK(a.history[e].epoch == e + 1);
      CHECK(a.history[e].train.total == b.history[e].train.total);
      CHECK(a.history[e].val.total == b.history[e].val.total);
    }
    CHECK(params_equal(a.params, b.params));
    cfg.seed = 43;
    const FitResult c = fit(init, train, val, {}, cfg);
    CHECK(c.history.back().train.total != a.history.back().train.total);
  }

  SUBCASE("training reduces the loss and returns the best validation epoch") {
    cfg.epochs = 15;
    cfg.learning_rate = 1e-2;
    const FitResult r = fit(init, train, val, {}, cfg);
    CHECK(r.history.back().train.total < r.history.front().train.total);
    REQUIRE(r.best_epoch >= 1);
    const double best = r.history[r.best_epoch - 1].val.total;
    for (const auto& e : r.history) CHECK(best <= e.val.total);
    CHECK(evaluate_loss(r.params, val, {}).total == doctest::Approx(best).epsilon(1e-12));
  }

  SUBCASE("early stopping bounds the history length") {
    cfg.epochs = 30;
    cfg.patience = 2;
    cfg.learning_rate = 0.5;
    const FitResult r = fit(init, train, val, {}, cfg);
    if (r.stopped_early) {
      CHECK(r.history.size() == r.best_epoch + 2);
    } else {
      CHECK(r.history.size() == 30);
    }
  }

  SUBCASE("zero epochs return the initial parameters") {
    cfg.epochs = 0;
    const FitResult r = fit(init, train, val, {}, cfg);
    CHECK(r.history.empty());
    CHECK(params_equal(r.params, init));
  }

  SUBCASE("non-finite data reports epoch and batch") {
    auto bad = train;
    bad[0].x(0, 0) = std::numeric_limits<double>::infinity();
    cfg.batch_size = bad.size();
    try {
      (void)fit(init, bad, {}, {}, cfg);
      FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("epoch 1") != std::string::npos);
      CHECK(msg.find("batch 0") != std::string::npos);
    }
  }

  SUBCASE("config errors") {
    CHECK_THROWS_AS(fit(init, {}, val, {}, cfg), DataError);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(fit(init, train, val, {}, cfg), ConfigError);
  }
}
