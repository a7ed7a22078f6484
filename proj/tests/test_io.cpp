#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bayesmc/errors.hpp"
#include "bayesmc/io.hpp"

using namespace bayesmc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "bayesmc_io_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.uniform_index(40)) - 20);
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-18.0) == "-18");
  CHECK(std::strtod(format_double(std::numeric_limits<double>::denorm_min()).c_str(), nullptr) ==
        std::numeric_limits<double>::denorm_min());
  CHECK(parse_double(format_double(std::numeric_limits<double>::denorm_min())) ==
        std::numeric_limits<double>::denorm_min());
  CHECK(parse_double("-2.0000000000000004") == -2.0000000000000004);
  CHECK_THROWS_AS(parse_double("1.5x"), InvalidArgument);
  CHECK_THROWS_AS(parse_double(""), InvalidArgument);
}

TEST_CASE("run CSV round trip") {
  SamplingTrace t;
  t.energies = {-1.5, -2.0000000000000004, 3.0};
  t.accepted = {1, 0, 1};
  t.k_used = {1, 7, 300};
  t.gamma_used = {0.0, 0.123456789012345678, 0.88};
  const auto dir = scratch("run");
  write_run_csv(dir / "r.csv", t);
  const auto back = read_run_csv(dir / "r.csv");
  CHECK(back.energies == t.energies);
  CHECK(back.accepted == t.accepted);
  CHECK(back.k_used == t.k_used);
  CHECK(back.gamma_used == t.gamma_used);
  CHECK(slurp(dir / "r.csv").rfind("step,energy,accepted,k_used,gamma_used\n0,-1.5,1,1,0\n", 0) == 0);

  std::ofstream(dir / "bad.csv") << "nope\n";
  CHECK_THROWS_AS(read_run_csv(dir / "bad.csv"), InvalidArgument);
  CHECK_THROWS_AS(read_run_csv(dir / "missing.csv"), InvalidArgument);
}

TEST_CASE("GP surface has one row per grid point") {
  Dataset d(2);
  d.add(Eigen::Vector2d(0.2, 0.4), 0.5);
  const GPPosterior gp(d, Hyperparams::defaults(2));
  const auto dir = scratch("surface");
  write_gp_surface_csv(dir / "s.csv", gp, {300, 0.88}, 100);
  std::ifstream in(dir / "s.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,gamma,mu,sigma");
  std::size_t rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 300 * 100);
  CHECK(last.rfind("300,0.88,", 0) == 0);
}

TEST_CASE("experiment tree and manifest") {
  ExperimentConfig c;
  c.model.topology = Topology::Grid2D;
  c.model.width = c.model.height = 4;
  c.model.temperature = 2.27;
  c.model.hamming_distance = 8;
  c.arms = {ArmSpec{}, ArmSpec{ArmKind::IMBayesOpt, {4, 0.88}}};
  c.num_runs = 2;
  c.steps_per_run = 300;
  c.burn_in = 50;
  c.adaptation.num_adaptations = 6;
  c.adaptation.steps_per_adaptation = 25;
  c.adaptation.init_design_size = 4;
  c.adaptation.direct_budget = 30;
  c.adaptation.param_box = {4, 0.88};
  c.policy_draws = 20;
  c.grid_gamma = 5;
  c.master_seed = 4;
  c.max_lag = 100;
  const auto records = run_experiment(c, 1);

  const auto dir = scratch("tree");
  write_experiment(dir, c, records);
  for (const char* f : {"manifest.json", "runs/Kawasaki_run0.csv", "runs/IMBayesOpt_run1.csv",
                        "policy/IMBayesOpt_run0_weights.csv", "policy/Kawasaki_run1_draws.csv",
                        "adaptation/IMBayesOpt_run0.csv", "adaptation/IMBayesOpt_run1_gp.json",
                        "aggregate/Kawasaki_acf.csv", "aggregate/IMBayesOpt_energy.csv"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
  }
  const auto manifest = read_json(dir / "manifest.json");
  CHECK(manifest["config_hash"] == config_hash(c));
  CHECK(manifest["master_seed"] == 4);
  CHECK(manifest["units"].size() == 4);
  CHECK(config_from_json(manifest["config"]).master_seed == 4);

  // Same config, same bytes (timing aside).
  const auto again_dir = scratch("tree2");
  write_experiment(again_dir, c, run_experiment(c, 2));
  for (const char* f : {"runs/IMBayesOpt_run1.csv", "aggregate/Kawasaki_acf.csv",
                        "adaptation/IMBayesOpt_run0_gp.json", "policy/IMBayesOpt_run1_draws.csv"}) {
    CHECK(slurp(dir / f) == slurp(again_dir / f));
  }
}

TEST_CASE("full-scale grid preset expands to the stated protocol") {
  const auto c = load_config(preset_path("grid2d"));
  const auto p = protocol_summary(c);
  CHECK(p["num_arms"] == 4);
  CHECK(p["num_runs"] == 5);
  CHECK(p["steps_per_run"] == 90000);
  CHECK(p["burn_in"] == 10000);
  CHECK(p["total_units"] == 20);
  CHECK(p["model"]["temperature"] == 2.27);
  CHECK(p["model"]["n"] == 1800);
  const auto& arms = p["arms"];
  CHECK(arms[1]["k_values"] == nlohmann::json::array({90, 90}));
  CHECK(arms[1]["gamma_values"][0] == 0.44);
  CHECK(arms[3]["adaptation"]["total_steps"] == 10000);
  CHECK(arms[3]["k_values"][1] == 300);
  CHECK(arms[3]["gamma_values"][1] == 0.88);
}
