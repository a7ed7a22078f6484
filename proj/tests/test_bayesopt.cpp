#include <doctest.h>

#include <cmath>
#include <vector>

#include "bayesmc/bayesopt.hpp"
#include "bayesmc/errors.hpp"
#include "bayesmc/harness.hpp"

using namespace bayesmc;

TEST_CASE("expected improvement closed forms") {
  CHECK(expected_improvement(0.3, 0.0, 0.5, 0.0) == 0.0);
  CHECK(expected_improvement(0.5, 0.0, 0.5, 0.0) == 0.0);
  CHECK(expected_improvement(0.9, 0.0, 0.5, 0.1) == doctest::Approx(0.3));
  CHECK(expected_improvement(1.0, 1.0, 1.0, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK_THROWS_AS(expected_improvement(NAN, 1.0, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(expected_improvement(0.0, -1.0, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("expected improvement agrees with Monte Carlo") {
  Rng rng(2718);
  for (int t = 0; t < 5; ++t) {
    const double mean = rng.normal();
    const double sd = 0.1 + rng.uniform();
    const double best = rng.normal();
    const double xi = 0.05 * rng.uniform();
    const int draws = 1000000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double g = std::max(0.0, mean + sd * rng.normal() - best - xi);
      s += g;
      s2 += g * g;
    }
    const double mc = s / draws;
    const double se = std::sqrt((s2 / draws - mc * mc) / draws);
    CHECK(std::abs(expected_improvement(mean, sd, best, xi) - mc) < 3 * se);
  }
}

TEST_CASE("expected improvement is non-negative and grows with std below the incumbent") {
  for (double mean = -1.0; mean < 0.99; mean += 0.1) {
    double prev = 0.0;
    for (double sd = 0.0; sd <= 3.0; sd += 0.05) {
      const double ei = expected_improvement(mean, sd, 1.0, 0.0);
      CHECK(ei >= 0.0);
      CHECK(ei >= prev - 1e-12);
      prev = ei;
    }
  }
}

TEST_CASE("DIRECT finds the stated optima") {
  auto smooth = [](const Eigen::VectorXd& x) {
    return -(x[0] - 0.5) * (x[0] - 0.5) - (x[1] - 0.5) * (x[1] - 0.5);
  };
  const auto r1 = direct_maximize(smooth, 2, 200);
  CHECK((r1.point - Eigen::Vector2d(0.5, 0.5)).norm() < 0.02);
  CHECK(r1.evaluations <= 200);

  auto kinked = [](const Eigen::VectorXd& x) { return -std::abs(x[0] - 0.2) - std::abs(x[1] - 0.8); };
  const auto r2 = direct_maximize(kinked, 2, 500);
  CHECK((r2.point - Eigen::Vector2d(0.2, 0.8)).norm() < 0.02);

  const auto again = direct_maximize(kinked, 2, 500);
  CHECK(again.point == r2.point);
  CHECK(again.value == r2.value);
  CHECK(again.evaluations == r2.evaluations);
}

TEST_CASE("DIRECT on a constant, budget and domain") {
  const auto flat = direct_maximize([](const Eigen::VectorXd&) { return 4.0; }, 3, 100);
  CHECK(flat.point == Eigen::Vector3d::Constant(0.5));
  CHECK(flat.value == 4.0);

  for (std::size_t budget : {1, 2, 7, 50, 333}) {
    std::size_t calls = 0;
    bool inside = true;
    double best_seen = -1e300;
    auto f = [&](const Eigen::VectorXd& x) {
      ++calls;
      inside = inside && (x.array() >= 0.0).all() && (x.array() <= 1.0).all();
      const double v = std::sin(7 * x[0]) * std::cos(5 * x[1]);
      best_seen = std::max(best_seen, v);
      return v;
    };
    const auto r = direct_maximize(f, 2, budget);
    CHECK(calls <= budget);
    CHECK(calls == r.evaluations);
    CHECK(inside);
    CHECK(r.value == best_seen);
  }
  CHECK_THROWS_AS(direct_maximize([](const Eigen::VectorXd&) { return 0.0; }, 2, 0), InvalidArgument);
}

TEST_CASE("parameter normalisation") {
  const ParamBox box{300, 0.88};
  for (int k : {1, 2, 150, 299, 300}) {
    for (double g : {0.0, 0.3, 0.88}) {
      const SamplerParams p{k, g};
      const auto u = normalize_params(p, box);
      const auto back = denormalize_params(u, box);
      CHECK(back.saw_length == k);
      CHECK(back.energy_bias == doctest::Approx(g).epsilon(1e-15));
    }
  }
  CHECK(denormalize_params(Eigen::Vector2d(0.0, 0.0), box).saw_length == 1);
  CHECK(denormalize_params(Eigen::Vector2d(1.0, 1.0), box).saw_length == 300);
  CHECK(normalize_params({1, 0.0}, ParamBox{1, 1.0})[0] == 0.0);
  CHECK_THROWS_AS(denormalize_params(Eigen::VectorXd::Zero(3), box), DimensionError);
}

TEST_CASE("adaptation loop") {
  const auto model = build_grid2d(6, 6, 1.0, 0.0, 1.0 / 2.27);
  const auto spec = ConstraintSpec::ones_count(36, 18);
  const auto start = initial_state(model, spec, 5, 0);
  AdaptationConfig cfg;
  cfg.num_adaptations = 20;
  cfg.steps_per_adaptation = 50;
  cfg.init_design_size = 6;
  cfg.param_box = {8, 1.0};
  cfg.direct_budget = 150;
  cfg.refit_every = 5;

  Rng rng(77);
  const auto rec = adapt(model, spec, cfg, start, rng);
  CHECK(rec.history.size() == 20);
  CHECK(rec.energies.size() == 20 * 50);
  REQUIRE(rec.gp_snapshot);
  CHECK(rec.gp_snapshot->dataset().size() == 20);
  REQUIRE(rec.final_state);
  CHECK(satisfies_constraint(rec.final_state->bits(), spec));
  CHECK(rec.energies.back() == rec.final_state->energy());
  for (std::size_t i = 0; i < rec.history.size(); ++i) {
    const auto& h = rec.history[i];
    CHECK(std::isfinite(h.score));
    CHECK(h.score <= 1.0);
    CHECK(cfg.param_box.contains(h.params));
    CHECK(h.acquisition.has_value() == (i >= 6));
  }

  // Chain carries over: iteration i+1 starts where iteration i stopped, so
  // replaying each evaluation from the previous final state reproduces it.
  Rng replay_rng = Rng(77).split("chain");
  BitState state = start;
  std::vector<double> energies;
  for (const auto& h : rec.history) {
    const auto step = evaluate_params(model, spec, state, h.params, 50, replay_rng, &energies);
    CHECK(step.score == h.score);
  }
  CHECK(energies == rec.energies);

  Rng again_rng(77);
  const auto again = adapt(model, spec, cfg, start, again_rng);
  REQUIRE(again.history.size() == rec.history.size());
  for (std::size_t i = 0; i < rec.history.size(); ++i) {
    CHECK(again.history[i].params == rec.history[i].params);
    CHECK(again.history[i].score == rec.history[i].score);
  }
  CHECK(again.energies == rec.energies);
}

TEST_CASE("adaptation at the full 100 x 100 budget takes 10^4 steps") {
  const auto model = build_grid2d(5, 5, 1.0, 0.0, 1.0 / 2.27);
  const auto spec = ConstraintSpec::ones_count(25, 12);
  AdaptationConfig cfg;
  cfg.param_box = {4, 0.88};
  cfg.direct_budget = 60;
  Rng rng(3);
  const auto rec = adapt(model, spec, cfg, initial_state(model, spec, 1, 0), rng);
  CHECK(rec.energies.size() == 10000);
}

TEST_CASE("adaptation config validation") {
  const auto model = build_grid2d(4, 4, 1.0, 0.0, 1.0);
  const auto spec = ConstraintSpec::ones_count(16, 3);
  const auto start = initial_state(model, spec, 1, 0);
  Rng rng(1);
  AdaptationConfig cfg;
  cfg.param_box = {5, 1.0};  // k = 5 > min(n, N - n) = 3
  CHECK_THROWS_AS(adapt(model, spec, cfg, start, rng), InfeasibleWalk);
  cfg.param_box = {2, 1.0};
  cfg.steps_per_adaptation = 10;
  CHECK_THROWS_AS(adapt(model, spec, cfg, start, rng), InvalidArgument);
  cfg.steps_per_adaptation = 100;
  cfg.init_design_size = 200;
  CHECK_THROWS_AS(adapt(model, spec, cfg, start, rng), InvalidArgument);
}
