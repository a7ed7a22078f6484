// bayesmc: command-line front end for the adaptive IM sampler experiments.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bayesmc/bayesopt.hpp"
#include "bayesmc/errors.hpp"
#include "bayesmc/harness.hpp"
#include "bayesmc/io.hpp"
#include "bayesmc/model.hpp"
#include "bayesmc/policy.hpp"

namespace fs = std::filesystem;
using namespace bayesmc;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out = "bayesmc_out";
  std::size_t jobs = 1;
  std::optional<std::size_t> max_lag;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  auto* config = cmd->add_option("--config", args.config_path, "Experiment config JSON");
  auto* preset = cmd->add_option("--preset", args.preset, "Bundled preset name");
  config->excludes(preset);
  cmd->add_option("--seed", args.seed, "Override the master seed");
  cmd->add_option("--out", args.out, "Output directory");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
  fs::path path;
  if (!args.config_path.empty()) {
    path = args.config_path;
  } else if (!args.preset.empty()) {
    path = preset_path(args.preset);
  } else {
    throw UsageError("one of --config or --preset is required");
  }
  if (!fs::exists(path)) throw UsageError("config file not found: " + path.string());
  auto config = load_config(path);
  if (args.seed) config.master_seed = *args.seed;
  if (args.max_lag) config.max_lag = *args.max_lag;
  return config;
}

const ArmSpec& require_arm(const ExperimentConfig& config, ArmKind kind) {
  const auto* arm = config.find_arm(kind);
  if (!arm) throw UsageError("config has no " + std::string(to_string(kind)) + " arm");
  return *arm;
}

int cmd_run(const CommonArgs& args) {
  const auto config = resolve_config(args);
  const auto records = run_experiment(config, args.jobs);
  write_experiment(args.out, config, records);
  std::cout << "wrote " << records.size() << " runs to " << args.out << '\n';
  return kOk;
}

int cmd_adapt(const CommonArgs& args, int run) {
  const auto config = resolve_config(args);
  const auto& arm = require_arm(config, ArmKind::IMBayesOpt);
  const auto model = config.model.build();
  const auto spec = config.model.constraint();
  const auto start = initial_state(model, spec, config.master_seed, run);
  Rng rng = Rng(unit_seed(config.master_seed, arm.kind, run)).split("adapt");
  const auto record = adapt(model, spec, config.adaptation_for(arm), start, rng);
  const fs::path out(args.out);
  write_adaptation_csv(out / "adaptation.csv", record);
  write_json(out / "gp.json", gp_to_json(*record.gp_snapshot));
  std::cout << "wrote adaptation.csv and gp.json to " << out << '\n';
  return kOk;
}

int cmd_sample(const CommonArgs& args, const std::string& gp_path, const std::string& arm_name,
               std::optional<std::size_t> steps, int run) {
  auto config = resolve_config(args);
  if (gp_path.empty() == arm_name.empty()) {
    throw UsageError("sample needs exactly one of --gp or --arm");
  }
  const auto model = config.model.build();
  const auto spec = config.model.constraint();
  Rng rng(derive_seed(config.master_seed, "sample-command"));
  Rng policy_rng = rng.split("policy");

  MixturePolicy policy;
  if (!gp_path.empty()) {
    if (!fs::exists(gp_path)) throw UsageError("GP snapshot not found: " + gp_path);
    const auto& arm = require_arm(config, ArmKind::IMBayesOpt);
    const auto gp = gp_from_json(read_json(gp_path));
    auto grid = build_boltzmann_policy(gp, arm.box, config.grid_gamma);
    policy = draw_policy(std::move(grid.support), std::move(grid.weights), config.policy_draws,
                         policy_rng);
  } else {
    ArmKind kind;
    try {
      kind = arm_from_string(arm_name);
    } catch (const ConfigError&) {
      throw UsageError("unknown arm '" + arm_name + "'");
    }
    if (kind == ArmKind::IMBayesOpt) throw UsageError("use --gp to sample an adapted policy");
    ArmSpec arm = kind == ArmKind::Kawasaki ? ArmSpec{} : require_arm(config, kind);
    policy = arm_policy(config, arm, nullptr, policy_rng);
  }

  BitState state = initial_state(model, spec, config.master_seed, run);
  Rng sampling_rng = rng.split("sampling");
  const auto trace = sampling_phase(model, spec, policy, state, steps.value_or(config.steps_per_run),
                                    sampling_rng);
  const fs::path out(args.out);
  write_run_csv(out / "trace.csv", trace);
  write_policy_csv(out / "policy_weights.csv", policy);
  write_draws_csv(out / "policy_draws.csv", policy);
  std::cout << "acceptance rate " << trace.acceptance_rate() << "; wrote " << out / "trace.csv"
            << '\n';
  return kOk;
}

int cmd_analyze(const std::string& runs_dir, std::size_t burn_in, std::size_t max_lag,
                const std::string& out_dir) {
  if (!fs::is_directory(runs_dir)) throw UsageError("runs directory not found: " + runs_dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("no run CSVs in " + runs_dir);

  std::vector<RunRecord> records;
  for (const auto& f : files) {
    // <arm>_run<r>.csv; anything else is grouped under its full stem.
    const std::string stem = f.stem().string();
    const auto cut = stem.rfind("_run");
    RunRecord r;
    r.arm = cut == std::string::npos ? stem : stem.substr(0, cut);
    r.run = cut == std::string::npos ? 0 : std::atoi(stem.c_str() + cut + 4);
    r.trace = read_run_csv(f);
    records.push_back(std::move(r));
  }
  const auto aggregates = aggregate_acf(records, burn_in, max_lag);
  for (const auto& agg : aggregates) {
    write_acf_csv(fs::path(out_dir) / (agg.arm + "_acf.csv"), agg);
    write_energy_csv(fs::path(out_dir) / (agg.arm + "_energy.csv"), agg);
  }
  std::cout << "aggregated " << records.size() << " runs into " << aggregates.size() << " arms\n";
  return kOk;
}

int cmd_dump_gp(const CommonArgs& args, const std::string& gp_path, std::size_t grid_gamma) {
  if (gp_path.empty() || !fs::exists(gp_path)) throw UsageError("--gp snapshot not found");
  const auto config = resolve_config(args);
  const auto& arm = require_arm(config, ArmKind::IMBayesOpt);
  const auto gp = gp_from_json(read_json(gp_path));
  const fs::path out = fs::path(args.out) / "gp_surface.csv";
  write_gp_surface_csv(out, gp, arm.box, grid_gamma);
  std::cout << "wrote " << arm.box.k_max << " x " << grid_gamma << " surface to " << out << '\n';
  return kOk;
}

int cmd_models(const CommonArgs& args) {
  if (args.config_path.empty() && args.preset.empty()) {
    std::cout << "presets in " << preset_dir() << ":\n";
    for (const auto& name : list_presets()) std::cout << "  " << name << '\n';
    return kOk;
  }
  const auto config = resolve_config(args);
  const auto model = config.model.build();
  const fs::path out = fs::path(args.out) / "model.json";
  write_json(out, model_to_json(model));
  std::cout << to_string(model.topology()) << ": " << model.num_sites() << " sites, "
            << model.num_edges() << " edges, beta " << model.beta() << "; wrote " << out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian-optimised adaptive MCMC for constrained Boltzmann machines"};
  app.require_subcommand(1);

  CommonArgs args;
  int run_index = 0;
  std::string gp_path;
  std::string arm_name;
  std::optional<std::size_t> steps;
  std::string runs_dir;
  std::size_t burn_in = 0;
  std::size_t max_lag = 2000;
  std::size_t grid_gamma = kDefaultGammaGrid;

  auto* run = app.add_subcommand("run", "Run every arm and replication of an experiment");
  add_common(run, args);
  run->add_option("--jobs", args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--max-lag", args.max_lag, "Largest ACF lag in the aggregates");

  auto* adapt_cmd = app.add_subcommand("adapt", "Run only the adaptation phase");
  add_common(adapt_cmd, args);
  adapt_cmd->add_option("--run", run_index, "Run index selecting the initial state");

  auto* sample = app.add_subcommand("sample", "Run a sampling phase from a GP snapshot or arm");
  add_common(sample, args);
  sample->add_option("--gp", gp_path, "GP snapshot from 'adapt'");
  sample->add_option("--arm", arm_name, "Kawasaki, IMExpert or IMUnif");
  sample->add_option("--steps", steps, "Number of steps (default: steps_per_run)");
  sample->add_option("--run", run_index, "Run index selecting the initial state");

  auto* analyze = app.add_subcommand("analyze", "Aggregate ACFs over run CSVs");
  analyze->add_option("--runs", runs_dir, "Directory of <arm>_run<r>.csv files")->required();
  analyze->add_option("--burn-in", burn_in, "Samples dropped from each trace");
  analyze->add_option("--max-lag", max_lag, "Largest lag");
  analyze->add_option("--out", args.out, "Output directory");

  auto* dump_gp = app.add_subcommand("dump-gp", "Evaluate a GP snapshot on the parameter grid");
  add_common(dump_gp, args);
  dump_gp->add_option("--gp", gp_path, "GP snapshot JSON")->required();
  dump_gp->add_option("--grid-gamma", grid_gamma, "Gamma grid points")->check(CLI::PositiveNumber);

  auto* models = app.add_subcommand("models", "List presets or export a preset's model");
  add_common(models, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(args);
    if (adapt_cmd->parsed()) return cmd_adapt(args, run_index);
    if (sample->parsed()) return cmd_sample(args, gp_path, arm_name, steps, run_index);
    if (analyze->parsed()) return cmd_analyze(runs_dir, burn_in, max_lag, args.out);
    if (dump_gp->parsed()) return cmd_dump_gp(args, gp_path, grid_gamma);
    if (models->parsed()) return cmd_models(args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
