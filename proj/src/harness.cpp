#include "bayesmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "bayesmc/errors.hpp"
#include "bayesmc/objective.hpp"

#ifndef BAYESMC_DEFAULT_PRESET_DIR
#define BAYESMC_DEFAULT_PRESET_DIR "presets"
#endif

namespace bayesmc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Model and arm specs

std::size_t ModelSpec::num_sites() const {
  switch (topology) {
    case Topology::Grid2D: return width * height;
    case Topology::Cube3D: return side * side * side;
    case Topology::RBM: return visible + hidden;
    case Topology::Custom: break;
  }
  throw UnsupportedTopology("experiment configs support grid2d, cube3d and rbm models");
}

BoltzmannModel ModelSpec::build() const {
  const double beta = 1.0 / temperature;
  switch (topology) {
    case Topology::Grid2D: return build_grid2d(width, height, coupling, bias, beta);
    case Topology::Cube3D: return build_cube3d(side, beta, seed);
    case Topology::RBM: return build_rbm(visible, hidden, beta, seed);
    case Topology::Custom: break;
  }
  throw UnsupportedTopology("experiment configs support grid2d, cube3d and rbm models");
}

std::string_view to_string(ArmKind kind) {
  switch (kind) {
    case ArmKind::Kawasaki: return "Kawasaki";
    case ArmKind::IMExpert: return "IMExpert";
    case ArmKind::IMUnif: return "IMUnif";
    case ArmKind::IMBayesOpt: return "IMBayesOpt";
  }
  return "Kawasaki";
}

ArmKind arm_from_string(std::string_view name) {
  for (auto k : {ArmKind::Kawasaki, ArmKind::IMExpert, ArmKind::IMUnif, ArmKind::IMBayesOpt}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown arm '" + std::string(name) + "'", "arm");
}

int ArmSpec::max_k() const {
  switch (kind) {
    case ArmKind::Kawasaki: return 1;
    case ArmKind::IMExpert: return expert_k_max;
    case ArmKind::IMUnif:
    case ArmKind::IMBayesOpt: return box.k_max;
  }
  return 1;
}

const ArmSpec* ExperimentConfig::find_arm(ArmKind kind) const {
  for (const auto& a : arms) {
    if (a.kind == kind) return &a;
  }
  return nullptr;
}

AdaptationConfig ExperimentConfig::adaptation_for(const ArmSpec& arm) const {
  AdaptationConfig c = adaptation;
  c.param_box = arm.box;
  return c;
}

void ExperimentConfig::validate() const {
  if (model.topology == Topology::Custom) {
    throw ConfigError("model.topology must be grid2d, cube3d or rbm", "topology");
  }
  if (!(model.temperature > 0.0) || !std::isfinite(model.temperature)) {
    throw ConfigError("model.temperature must be positive", "temperature");
  }
  const std::size_t n_sites = model.num_sites();
  if (n_sites == 0) throw ConfigError("model has no sites", "model");
  if (model.hamming_distance == 0 || model.hamming_distance >= n_sites) {
    throw ConfigError("model.hamming_distance must lie strictly between 0 and " +
                          std::to_string(n_sites),
                      "hamming_distance");
  }
  if (arms.empty()) throw ConfigError("at least one arm is required", "arms");
  for (std::size_t a = 0; a < arms.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (arms[a].kind == arms[b].kind) {
        throw ConfigError("arm " + arms[a].name() + " listed twice", "arms");
      }
    }
  }
  if (num_runs < 1) throw ConfigError("num_runs must be >= 1", "num_runs");
  if (burn_in >= steps_per_run) {
    throw ConfigError("burn_in must be smaller than steps_per_run", "burn_in");
  }
  if (policy_draws < 1) throw ConfigError("policy.draws must be >= 1", "draws");
  if (grid_gamma < 1) throw ConfigError("policy.grid_gamma must be >= 1", "grid_gamma");

  const auto spec = model.constraint();
  const std::size_t k_limit = max_walk_length(spec);
  for (const auto& arm : arms) {
    const std::string key = arm.kind == ArmKind::IMExpert ? "k_min" : "k_max";
    if (arm.kind == ArmKind::IMExpert) {
      if (arm.expert_k_min < 1 || arm.expert_k_max < arm.expert_k_min) {
        throw ConfigError("IMExpert k range is empty", "k_min");
      }
      if (!(arm.expert_gamma >= 0.0)) throw ConfigError("IMExpert gamma must be >= 0", "gamma");
    }
    if (arm.kind == ArmKind::IMUnif || arm.kind == ArmKind::IMBayesOpt) {
      try {
        arm.box.validate();
      } catch (const InvalidArgument& ex) {
        throw ConfigError(arm.name() + ": " + ex.what(), "k_max");
      }
    }
    if (static_cast<std::size_t>(arm.max_k()) > k_limit) {
      throw ConfigError(arm.name() + " walk length " + std::to_string(arm.max_k()) +
                            " exceeds min(n, N - n) = " + std::to_string(k_limit),
                        key);
    }
    if (arm.kind == ArmKind::IMBayesOpt) {
      try {
        adaptation_for(arm).validate();
      } catch (const InvalidArgument& ex) {
        throw ConfigError(std::string("adaptation: ") + ex.what(), "adaptation");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type", key);
  }
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'", key);
  return get_or<T>(j, key, T{});
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", "experiment");

  if (!j.contains("model")) throw ConfigError("missing field 'model'", "model");
  const auto& m = j.at("model");
  try {
    c.model.topology = topology_from_string(require<std::string>(m, "topology"));
  } catch (const UnsupportedTopology& ex) {
    throw ConfigError(ex.what(), "topology");
  }
  switch (c.model.topology) {
    case Topology::Grid2D:
      c.model.width = require<std::size_t>(m, "width");
      c.model.height = require<std::size_t>(m, "height");
      break;
    case Topology::Cube3D: c.model.side = require<std::size_t>(m, "side"); break;
    case Topology::RBM:
      c.model.visible = require<std::size_t>(m, "visible");
      c.model.hidden = require<std::size_t>(m, "hidden");
      break;
    case Topology::Custom: throw ConfigError("custom topology is not supported", "topology");
  }
  c.model.temperature = require<double>(m, "temperature");
  c.model.coupling = get_or<double>(m, "coupling", 1.0);
  c.model.bias = get_or<double>(m, "bias", 0.0);
  c.model.hamming_distance = require<std::size_t>(m, "hamming_distance");
  c.model.seed = get_or<std::uint64_t>(m, "seed", 0);

  if (!j.contains("arms") || !j.at("arms").is_array()) {
    throw ConfigError("missing array 'arms'", "arms");
  }
  for (const auto& a : j.at("arms")) {
    ArmSpec arm;
    arm.kind = arm_from_string(require<std::string>(a, "arm"));
    switch (arm.kind) {
      case ArmKind::Kawasaki: break;
      case ArmKind::IMExpert:
        arm.expert_k_min = require<int>(a, "k_min");
        arm.expert_k_max = require<int>(a, "k_max");
        arm.expert_gamma = require<double>(a, "gamma");
        break;
      case ArmKind::IMUnif:
      case ArmKind::IMBayesOpt:
        arm.box.k_max = require<int>(a, "k_max");
        arm.box.gamma_max = require<double>(a, "gamma_max");
        break;
    }
    c.arms.push_back(arm);
  }

  c.num_runs = get_or<int>(j, "num_runs", c.num_runs);
  c.steps_per_run = get_or<std::size_t>(j, "steps_per_run", c.steps_per_run);
  c.burn_in = get_or<std::size_t>(j, "burn_in", c.burn_in);
  c.master_seed = get_or<std::uint64_t>(j, "master_seed", c.master_seed);
  c.max_lag = get_or<std::size_t>(j, "max_lag", c.max_lag);

  if (j.contains("adaptation")) {
    const auto& ad = j.at("adaptation");
    auto& cfg = c.adaptation;
    cfg.num_adaptations = get_or<int>(ad, "num_adaptations", cfg.num_adaptations);
    cfg.steps_per_adaptation = get_or<int>(ad, "steps_per_adaptation", cfg.steps_per_adaptation);
    cfg.init_design_size = get_or<int>(ad, "init_design_size", cfg.init_design_size);
    cfg.ei_exploration = get_or<double>(ad, "ei_exploration", cfg.ei_exploration);
    cfg.direct_budget = get_or<int>(ad, "direct_budget", cfg.direct_budget);
    cfg.refit_every = get_or<int>(ad, "refit_every", cfg.refit_every);
    cfg.restart_chain = get_or<bool>(ad, "restart_chain", cfg.restart_chain);
  }
  if (j.contains("policy")) {
    const auto& p = j.at("policy");
    c.policy_draws = get_or<std::size_t>(p, "draws", c.policy_draws);
    c.grid_gamma = get_or<std::size_t>(p, "grid_gamma", c.grid_gamma);
  }
  if (const auto* bo = c.find_arm(ArmKind::IMBayesOpt)) c.adaptation.param_box = bo->box;
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json model = {{"topology", to_string(c.model.topology)},
                {"temperature", c.model.temperature},
                {"hamming_distance", c.model.hamming_distance},
                {"seed", c.model.seed}};
  switch (c.model.topology) {
    case Topology::Grid2D:
      model["width"] = c.model.width;
      model["height"] = c.model.height;
      model["coupling"] = c.model.coupling;
      model["bias"] = c.model.bias;
      break;
    case Topology::Cube3D: model["side"] = c.model.side; break;
    case Topology::RBM:
      model["visible"] = c.model.visible;
      model["hidden"] = c.model.hidden;
      break;
    case Topology::Custom: break;
  }
  json arms = json::array();
  for (const auto& a : c.arms) {
    json arm = {{"arm", a.name()}};
    if (a.kind == ArmKind::IMExpert) {
      arm["k_min"] = a.expert_k_min;
      arm["k_max"] = a.expert_k_max;
      arm["gamma"] = a.expert_gamma;
    } else if (a.kind != ArmKind::Kawasaki) {
      arm["k_max"] = a.box.k_max;
      arm["gamma_max"] = a.box.gamma_max;
    }
    arms.push_back(std::move(arm));
  }
  const auto& ad = c.adaptation;
  return {{"name", c.name},
          {"model", std::move(model)},
          {"arms", std::move(arms)},
          {"num_runs", c.num_runs},
          {"steps_per_run", c.steps_per_run},
          {"burn_in", c.burn_in},
          {"adaptation",
           {{"num_adaptations", ad.num_adaptations},
            {"steps_per_adaptation", ad.steps_per_adaptation},
            {"init_design_size", ad.init_design_size},
            {"ei_exploration", ad.ei_exploration},
            {"direct_budget", ad.direct_budget},
            {"refit_every", ad.refit_every},
            {"restart_chain", ad.restart_chain}}},
          {"policy", {{"draws", c.policy_draws}, {"grid_gamma", c.grid_gamma}}},
          {"master_seed", c.master_seed},
          {"max_lag", c.max_lag}};
}

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(),
                                         text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
  if (key.empty()) return 0;
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    const int line = line_of_offset(text, ex.byte > 0 ? ex.byte - 1 : 0);
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + ex.what(), {}, line);
  }
  try {
    auto config = config_from_json(j);
    config.validate();
    return config;
  } catch (const ConfigError& ex) {
    const int line = line_of_key(text, ex.key());
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + ex.what(), ex.key(),
                      line);
  }
}

std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("BAYESMC_PRESET_DIR"); env && *env) return env;
  return BAYESMC_DEFAULT_PRESET_DIR;
}

std::filesystem::path preset_path(const std::string& name) {
  return preset_dir() / (name + ".json");
}

std::vector<std::string> list_presets() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(preset_dir(), ec)) {
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

// ---------------------------------------------------------------------------
// Running

std::uint64_t unit_seed(std::uint64_t master_seed, ArmKind arm, int run) {
  return derive_seed(derive_seed(master_seed, to_string(arm)), static_cast<std::uint64_t>(run));
}

BitState initial_state(const BoltzmannModel& model, const ConstraintSpec& spec,
                       std::uint64_t master_seed, int run) {
  const std::size_t n_sites = model.num_sites();
  if (spec.reference.size() != n_sites || spec.hamming_distance > n_sites) {
    throw DimensionError("constraint does not fit the model");
  }
  Rng rng(derive_seed(derive_seed(master_seed, "initial-state"), static_cast<std::uint64_t>(run)));
  std::vector<std::size_t> order(n_sites);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Bits bits = spec.reference;
  for (std::size_t a = 0; a < spec.hamming_distance; ++a) {
    const std::size_t b = a + rng.uniform_index(n_sites - a);
    std::swap(order[a], order[b]);
    bits[order[a]] ^= 1U;
  }
  return BitState(model, std::move(bits));
}

MixturePolicy arm_policy(const ExperimentConfig& config, const ArmSpec& arm,
                         const AdaptationRecord* adaptation, Rng& rng) {
  PolicyGrid grid;
  switch (arm.kind) {
    case ArmKind::Kawasaki: grid = point_policy({1, 0.0}); break;
    case ArmKind::IMExpert:
      grid = expert_policy(arm.expert_k_min, arm.expert_k_max, arm.expert_gamma);
      break;
    case ArmKind::IMUnif: grid = uniform_policy(arm.box, config.grid_gamma); break;
    case ArmKind::IMBayesOpt:
      if (!adaptation || !adaptation->gp_snapshot) {
        throw InvalidArgument("IMBayesOpt policy needs a completed adaptation");
      }
      grid = build_boltzmann_policy(*adaptation->gp_snapshot, arm.box, config.grid_gamma);
      break;
  }
  return draw_policy(std::move(grid.support), std::move(grid.weights), config.policy_draws, rng);
}

RunRecord run_unit(const ExperimentConfig& config, const BoltzmannModel& model, const ArmSpec& arm,
                   int run) {
  const auto started = std::chrono::steady_clock::now();
  const auto spec = config.model.constraint();
  const BitState start = initial_state(model, spec, config.master_seed, run);

  RunRecord rec;
  rec.arm = arm.name();
  rec.run = run;
  rec.seed = unit_seed(config.master_seed, arm.kind, run);
  const Rng rng(rec.seed);

  if (arm.kind == ArmKind::IMBayesOpt) {
    Rng adapt_rng = rng.split("adapt");
    rec.adaptation = adapt(model, spec, config.adaptation_for(arm), start, adapt_rng);
  }
  Rng policy_rng = rng.split("policy");
  rec.policy = arm_policy(config, arm, rec.adaptation ? &*rec.adaptation : nullptr, policy_rng);

  BitState state = start;
  Rng sampling_rng = rng.split("sampling");
  rec.trace = sampling_phase(model, spec, *rec.policy, state, config.steps_per_run, sampling_rng);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, std::size_t jobs) {
  config.validate();
  const BoltzmannModel model = config.model.build();

  struct Unit {
    const ArmSpec* arm;
    int run;
  };
  std::vector<Unit> units;
  for (const auto& arm : config.arms) {
    for (int r = 0; r < config.num_runs; ++r) units.push_back({&arm, r});
  }
  std::vector<RunRecord> records(units.size());
  std::vector<std::exception_ptr> errors(units.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t u = next++; u < units.size(); u = next++) {
      try {
        records[u] = run_unit(config, model, *units[u].arm, units[u].run);
      } catch (...) {
        errors[u] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, units.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

std::vector<ArmAggregate> aggregate_acf(const std::vector<RunRecord>& records,
                                        std::size_t burn_in, std::size_t max_lag) {
  std::vector<ArmAggregate> out;
  std::vector<std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const ArmAggregate& a) { return a.arm == r.arm; });
    if (it == out.end()) {
      out.push_back({r.arm, 0, {}, {}, {}});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&r);
  }

  for (std::size_t g = 0; g < out.size(); ++g) {
    const auto& runs = groups[g];
    auto& agg = out[g];
    agg.runs = runs.size();
    if (runs.size() < 2) {
      throw InvalidArgument("arm " + agg.arm + " needs at least two runs for standard errors");
    }
    std::vector<std::vector<double>> curves;
    std::size_t shortest = std::numeric_limits<std::size_t>::max();
    for (const auto* r : runs) {
      const auto& e = r->trace.energies;
      if (burn_in >= e.size() || max_lag >= e.size() - burn_in) {
        throw InvalidArgument("max_lag must be smaller than the post-burn-in trace length");
      }
      curves.push_back(autocorr_curve(std::span<const double>(e).subspan(burn_in), max_lag));
      shortest = std::min(shortest, e.size());
    }
    const double n = static_cast<double>(runs.size());
    agg.acf_mean.assign(max_lag, 0.0);
    agg.acf_stderr.assign(max_lag, 0.0);
    for (std::size_t l = 0; l < max_lag; ++l) {
      double mean = 0.0;
      for (const auto& c : curves) mean += c[l];
      mean /= n;
      double ss = 0.0;
      for (const auto& c : curves) ss += (c[l] - mean) * (c[l] - mean);
      agg.acf_mean[l] = mean;
      agg.acf_stderr[l] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    agg.mean_energy.assign(shortest, 0.0);
    for (const auto* r : runs) {
      for (std::size_t s = 0; s < shortest; ++s) agg.mean_energy[s] += r->trace.energies[s];
    }
    for (double& v : agg.mean_energy) v /= n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact enumeration

ExactDistribution::ExactDistribution(std::vector<std::uint64_t> keys, std::vector<double> probs)
    : keys_(std::move(keys)), probs_(std::move(probs)) {
  if (keys_.size() != probs_.size()) throw DimensionError("keys and probabilities differ in size");
  std::vector<std::size_t> order(keys_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys_[a] < keys_[b]; });
  std::vector<std::uint64_t> k(keys_.size());
  std::vector<double> p(keys_.size());
  for (std::size_t a = 0; a < order.size(); ++a) {
    k[a] = keys_[order[a]];
    p[a] = probs_[order[a]];
  }
  keys_ = std::move(k);
  probs_ = std::move(p);
}

std::size_t ExactDistribution::index_of(std::uint64_t key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  return (it != keys_.end() && *it == key) ? static_cast<std::size_t>(it - keys_.begin()) : keys_.size();
}

double ExactDistribution::prob(std::uint64_t key) const {
  const auto idx = index_of(key);
  return idx < keys_.size() ? probs_[idx] : 0.0;
}

double ExactDistribution::prob(std::span<const std::uint8_t> bits) const {
  return prob(pack_state(bits));
}

std::uint64_t pack_state(std::span<const std::uint8_t> bits) {
  if (bits.size() > 64) throw StateSpaceTooLarge("state packing supports at most 64 sites");
  std::uint64_t key = 0;
  for (std::size_t s = 0; s < bits.size(); ++s) {
    if (bits[s]) key |= std::uint64_t{1} << s;
  }
  return key;
}

Bits unpack_state(std::uint64_t key, std::size_t num_sites) {
  Bits bits(num_sites);
  for (std::size_t s = 0; s < num_sites; ++s) bits[s] = static_cast<std::uint8_t>((key >> s) & 1U);
  return bits;
}

ExactDistribution exact_distribution(const BoltzmannModel& model, const ConstraintSpec& spec) {
  const std::size_t n_sites = model.num_sites();
  const std::size_t n = spec.hamming_distance;
  if (spec.reference.size() != n_sites) throw DimensionError("reference length mismatch");
  if (n > n_sites) throw InvalidArgument("hamming distance exceeds the number of sites");
  if (n_sites > 64) throw StateSpaceTooLarge("exact enumeration supports at most 64 sites");

  double count = 1.0;
  for (std::size_t a = 0; a < n; ++a) {
    count = count * static_cast<double>(n_sites - a) / static_cast<double>(a + 1);
  }
  if (count > static_cast<double>(kMaxEnumeratedStates) + 0.5) {
    throw StateSpaceTooLarge("|S_n| = " + std::to_string(static_cast<long long>(count)) +
                             " exceeds the enumeration limit");
  }

  std::vector<std::uint64_t> keys;
  std::vector<double> log_w;
  keys.reserve(static_cast<std::size_t>(count + 0.5));
  log_w.reserve(keys.capacity());
  std::vector<std::size_t> pos(n);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  Bits bits = spec.reference;
  while (true) {
    Bits x = bits;
    for (std::size_t p : pos) x[p] ^= 1U;
    keys.push_back(pack_state(x));
    log_w.push_back(-model.beta() * energy(model, x));
    // Next combination in lexicographic order.
    std::size_t a = n;
    while (a > 0 && pos[a - 1] == n_sites - n + (a - 1)) --a;
    if (a == 0) break;
    ++pos[a - 1];
    for (std::size_t b = a; b < n; ++b) pos[b] = pos[b - 1] + 1;
  }
  return ExactDistribution(std::move(keys), softmax(log_w));
}

double total_variation(const ExactDistribution& exact,
                       const std::vector<std::pair<std::uint64_t, double>>& empirical) {
  std::vector<double> diff(exact.probs());
  double outside = 0.0;
  for (const auto& [key, p] : empirical) {
    const auto idx = exact.index_of(key);
    if (idx < diff.size()) {
      diff[idx] -= p;
    } else {
      outside += p;
    }
  }
  double l1 = outside;
  for (double d : diff) l1 += std::abs(d);
  return 0.5 * l1;
}

double chain_vs_oracle(const BoltzmannModel& model, const ConstraintSpec& spec,
                       const Kernel& kernel, BitState start, std::size_t steps,
                       std::size_t burn_in) {
  const auto exact = exact_distribution(model, spec);
  std::unordered_map<std::uint64_t, std::size_t> counts;
  std::size_t recorded = 0;
  for (std::size_t s = 0; s < steps; ++s) {
    kernel(start);
    if (s >= burn_in) {
      ++counts[pack_state(start.bits())];
      ++recorded;
    }
  }
  std::vector<std::pair<std::uint64_t, double>> empirical;
  if (recorded == 0) {
    empirical.emplace_back(pack_state(start.bits()), 1.0);
  } else {
    empirical.reserve(counts.size());
    for (const auto& [key, c] : counts) {
      empirical.emplace_back(key, static_cast<double>(c) / static_cast<double>(recorded));
    }
  }
  return total_variation(exact, empirical);
}

}  // namespace bayesmc
