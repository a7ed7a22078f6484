#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "bayesmc/errors.hpp"
#include "bayesmc/harness.hpp"
#include "test_support.hpp"

using namespace bayesmc;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.model.topology = Topology::Grid2D;
  c.model.width = c.model.height = 5;
  c.model.temperature = 2.27;
  c.model.hamming_distance = 12;
  ArmSpec kaw;
  ArmSpec expert{ArmKind::IMExpert, {}, 1, 3, 0.4};
  ArmSpec unif{ArmKind::IMUnif, {6, 0.88}};
  ArmSpec bo{ArmKind::IMBayesOpt, {6, 0.88}};
  c.arms = {kaw, expert, unif, bo};
  c.num_runs = 2;
  c.steps_per_run = 600;
  c.burn_in = 100;
  c.adaptation.num_adaptations = 12;
  c.adaptation.steps_per_adaptation = 30;
  c.adaptation.init_design_size = 5;
  c.adaptation.direct_budget = 60;
  c.adaptation.param_box = bo.box;
  c.policy_draws = 50;
  c.grid_gamma = 10;
  c.master_seed = 99;
  c.max_lag = 50;
  return c;
}

fs::path write_temp(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / ("bayesmc_test_" + name);
  std::ofstream(path) << text;
  return path;
}

RunRecord record(const std::string& arm, int run, std::vector<double> energies) {
  RunRecord r;
  r.arm = arm;
  r.run = run;
  r.trace.energies = std::move(energies);
  return r;
}

}  // namespace

TEST_CASE("exact distribution on a 4-ring") {
  const double beta = 0.8;
  const BoltzmannModel ring(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}}, {0, 0, 0, 0}, beta);
  const auto spec = ConstraintSpec::ones_count(4, 2);
  const auto exact = exact_distribution(ring, spec);
  CHECK(exact.size() == 6);
  // Four adjacent pairs at E = -1, two opposite pairs at E = 0.
  const double z = 4 * std::exp(beta) + 2;
  CHECK(exact.prob(Bits{1, 1, 0, 0}) == doctest::Approx(std::exp(beta) / z).epsilon(1e-14));
  CHECK(exact.prob(Bits{0, 1, 1, 0}) == doctest::Approx(std::exp(beta) / z).epsilon(1e-14));
  CHECK(exact.prob(Bits{1, 0, 1, 0}) == doctest::Approx(1 / z).epsilon(1e-14));
  CHECK(exact.prob(Bits{1, 1, 1, 0}) == 0.0);
}

TEST_CASE("exact distribution limits and sizes") {
  const auto hot = build_grid2d(4, 4, 1.0, 0.0, 1e-300);
  const auto spec = ConstraintSpec::ones_count(16, 8);
  const auto exact = exact_distribution(hot, spec);
  CHECK(exact.size() == 12870);
  long double total = 0.0L;
  for (double p : exact.probs()) {
    CHECK(std::abs(p - 1.0 / 12870) < 1e-12);
    total += p;
  }
  CHECK(std::abs(total - 1.0) < 1e-12);

  const auto cold = exact_distribution(build_cube3d(3, 1.0, 2), ConstraintSpec::ones_count(27, 6));
  long double s = 0.0L;
  for (double p : cold.probs()) s += p;
  CHECK(std::abs(s - 1.0) < 1e-12);

  const auto big = build_grid2d(8, 8, 1.0, 0.0, 1.0);
  CHECK_THROWS_AS(exact_distribution(big, ConstraintSpec::ones_count(64, 32)), StateSpaceTooLarge);

  for (std::uint64_t key : {0ULL, 5ULL, 0xF0F0ULL}) CHECK(pack_state(unpack_state(key, 16)) == key);
}

TEST_CASE("chain_vs_oracle with zero steps is a point-mass distance") {
  const auto model = build_grid2d(3, 3, 1.0, 0.0, 1.0 / 2.27);
  const auto spec = ConstraintSpec::ones_count(9, 4);
  const BitState start(model, Bits{1, 1, 0, 0, 1, 1, 0, 0, 0});
  const auto exact = exact_distribution(model, spec);
  const double tv = chain_vs_oracle(model, spec, [](BitState&) {}, start, 0);
  CHECK(tv == doctest::Approx(1.0 - exact.prob(start.bits())).epsilon(1e-14));
}

TEST_CASE("aggregate ACF") {
  Rng rng(4);
  std::vector<double> noise(2000);
  for (auto& v : noise) v = rng.normal();
  const auto same = aggregate_acf({record("A", 0, noise), record("A", 1, noise)}, 0, 30);
  REQUIRE(same.size() == 1);
  CHECK(same[0].runs == 2);
  for (double se : same[0].acf_stderr) CHECK(se == 0.0);
  CHECK(same[0].mean_energy == noise);

  std::vector<RunRecord> white;
  for (int r = 0; r < 8; ++r) {
    std::vector<double> x(5000);
    for (auto& v : x) v = rng.normal();
    white.push_back(record("W", r, x));
  }
  const auto w = aggregate_acf(white, 0, 5);
  CHECK(std::abs(w[0].acf_mean[0]) < 3 * w[0].acf_stderr[0]);

  // A huge transient in the first 10^4 samples dominates the full-trace ACF
  // but vanishes once burn-in is dropped.
  std::vector<RunRecord> regimes;
  for (int r = 0; r < 3; ++r) {
    std::vector<double> x(30000);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = (t < 10000 ? 1000.0 : 0.0) + rng.normal();
    regimes.push_back(record("T", r, x));
  }
  const auto full = aggregate_acf(regimes, 0, 10);
  const auto trimmed = aggregate_acf(regimes, 10000, 10);
  CHECK(full[0].acf_mean[0] > 0.9);
  CHECK(std::abs(trimmed[0].acf_mean[0]) < 0.05);

  CHECK_THROWS_AS(aggregate_acf({record("A", 0, noise), record("A", 1, noise)}, 1990, 10),
                  InvalidArgument);
  CHECK_THROWS_AS(aggregate_acf({record("A", 0, noise)}, 0, 10), InvalidArgument);
}

TEST_CASE("initial states and seeds") {
  const auto c = small_config();
  const auto model = c.model.build();
  const auto spec = c.model.constraint();
  const auto a = initial_state(model, spec, 99, 0);
  const auto b = initial_state(model, spec, 99, 0);
  const auto other = initial_state(model, spec, 99, 1);
  CHECK(a == b);
  CHECK_FALSE(a == other);
  CHECK(satisfies_constraint(a.bits(), spec));
  CHECK(unit_seed(99, ArmKind::IMUnif, 0) != unit_seed(99, ArmKind::IMUnif, 1));
  CHECK(unit_seed(99, ArmKind::IMUnif, 0) != unit_seed(99, ArmKind::Kawasaki, 0));
}

TEST_CASE("run_experiment is deterministic, arm-isolated and thread-count independent") {
  const auto c = small_config();
  const auto one = run_experiment(c, 1);
  REQUIRE(one.size() == 8);
  CHECK(one[0].arm == "Kawasaki");
  CHECK(one[7].arm == "IMBayesOpt");
  CHECK(one[7].run == 1);
  for (const auto& r : one) {
    CHECK(r.trace.energies.size() == 600);
    CHECK(r.policy.has_value());
    CHECK(r.adaptation.has_value() == (r.arm == "IMBayesOpt"));
  }
  CHECK(one[6].adaptation->energies.size() == 12 * 30);

  const auto threaded = run_experiment(c, 3);
  for (std::size_t u = 0; u < one.size(); ++u) {
    CHECK(threaded[u].trace.energies == one[u].trace.energies);
    CHECK(threaded[u].trace.k_used == one[u].trace.k_used);
  }

  auto solo = c;
  solo.arms = {c.arms[2]};
  const auto isolated = run_experiment(solo, 1);
  REQUIRE(isolated.size() == 2);
  CHECK(isolated[0].trace.energies == one[4].trace.energies);
  CHECK(isolated[1].trace.gamma_used == one[5].trace.gamma_used);

  auto reseeded = c;
  reseeded.master_seed = 100;
  CHECK(run_experiment(reseeded, 1)[0].trace.energies != one[0].trace.energies);
}

TEST_CASE("config validation") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  c.burn_in = 600;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.arms[2].box.k_max = 13;  // min(n, N - n) = 12
  try {
    c.validate();
    FAIL("expected a config error");
  } catch (const ConfigError& ex) {
    CHECK(ex.key() == "k_max");
  }
  c = small_config();
  c.arms.push_back(c.arms[0]);
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("config files") {
  const auto c = small_config();
  const auto back = config_from_json(nlohmann::json::parse(config_to_json(c).dump()));
  CHECK(config_to_json(back) == config_to_json(c));

  const auto good = write_temp("good.json", config_to_json(c).dump(2));
  CHECK(load_config(good).master_seed == 99);

  const auto broken = write_temp("broken.json", "{\n  \"name\": \"x\",\n  \"model\": {\n    oops\n  }\n}\n");
  try {
    load_config(broken);
    FAIL("expected a parse error");
  } catch (const ConfigError& ex) {
    CHECK(ex.line() == 4);
  }

  auto j = config_to_json(c);
  j["burn_in"] = 5000;
  const auto semantic = write_temp("semantic.json", j.dump(2));
  try {
    load_config(semantic);
    FAIL("expected a semantic error");
  } catch (const ConfigError& ex) {
    CHECK(ex.key() == "burn_in");
    std::ifstream in(semantic);
    std::string line;
    for (int i = 1; i <= ex.line(); ++i) std::getline(in, line);
    CHECK(line.find("\"burn_in\"") != std::string::npos);
  }

  auto bad_arm = config_to_json(c);
  bad_arm["arms"][0]["arm"] = "Gibbs";
  CHECK_THROWS_AS(config_from_json(bad_arm), ConfigError);
}

TEST_CASE("bundled presets load and round-trip") {
  const auto names = list_presets();
  for (const char* want : {"grid2d", "cube3d", "rbm", "grid2d-desk", "cube3d-desk", "rbm-desk"}) {
    CHECK(std::find(names.begin(), names.end(), want) != names.end());
  }
  for (const auto& name : names) {
    CAPTURE(name);
    const auto c = load_config(preset_path(name));
    CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));
  }

  const auto grid = load_config(preset_path("grid2d"));
  CHECK(grid.model.width == 60);
  CHECK(grid.model.hamming_distance == 1800);
  CHECK(grid.model.temperature == 2.27);
  CHECK(grid.num_runs == 5);
  CHECK(grid.steps_per_run == 90000);
  CHECK(grid.burn_in == 10000);
  const auto* expert = grid.find_arm(ArmKind::IMExpert);
  REQUIRE(expert);
  CHECK(expert->expert_k_min == 90);
  CHECK(expert->expert_k_max == 90);
  CHECK(expert->expert_gamma == 0.44);
  const auto* bo = grid.find_arm(ArmKind::IMBayesOpt);
  REQUIRE(bo);
  CHECK(bo->box.k_max == 300);
  CHECK(bo->box.gamma_max == 0.88);

  const auto cube = load_config(preset_path("cube3d"));
  CHECK(cube.model.side == 9);
  CHECK(cube.model.hamming_distance == 364);
  CHECK(cube.find_arm(ArmKind::IMExpert)->expert_k_max == 25);
  CHECK(cube.find_arm(ArmKind::IMUnif)->box.k_max == 50);

  const auto rbm = load_config(preset_path("rbm"));
  CHECK(rbm.model.visible == 784);
  CHECK(rbm.model.hidden == 500);
  CHECK(rbm.model.hamming_distance == 428);
  CHECK(rbm.find_arm(ArmKind::IMExpert)->expert_k_max == 20);
  CHECK(rbm.find_arm(ArmKind::IMBayesOpt)->box.gamma_max == 1.6);
}
