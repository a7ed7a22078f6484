#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bayesmc/bayesopt.hpp"
#include "bayesmc/model.hpp"
#include "bayesmc/policy.hpp"
#include "bayesmc/rng.hpp"
#include "bayesmc/samplers.hpp"

namespace bayesmc {

/// Model topology plus its size, temperature and constraint.
struct ModelSpec {
  Topology topology = Topology::Grid2D;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t side = 0;
  std::size_t visible = 0;
  std::size_t hidden = 0;
  /// beta^-1, as configured.
  double temperature = 1.0;
  double coupling = 1.0;
  double bias = 0.0;
  /// n: number of ones, with the all-zeros reference state.
  std::size_t hamming_distance = 0;
  std::uint64_t seed = 0;

  std::size_t num_sites() const;
  BoltzmannModel build() const;
  ConstraintSpec constraint() const { return ConstraintSpec::ones_count(num_sites(), hamming_distance); }
};

enum class ArmKind { Kawasaki, IMExpert, IMUnif, IMBayesOpt };

std::string_view to_string(ArmKind kind);
ArmKind arm_from_string(std::string_view name);

struct ArmSpec {
  ArmKind kind = ArmKind::Kawasaki;
  /// Theta for IMUnif and IMBayesOpt.
  ParamBox box;
  /// IMExpert: k uniform on {expert_k_min..expert_k_max}, gamma fixed.
  int expert_k_min = 1;
  int expert_k_max = 1;
  double expert_gamma = 0.0;

  std::string name() const { return std::string(to_string(kind)); }
  /// Largest walk length this arm can request.
  int max_k() const;
};

struct ExperimentConfig {
  std::string name;
  ModelSpec model;
  std::vector<ArmSpec> arms;
  int num_runs = 5;
  std::size_t steps_per_run = 90'000;
  std::size_t burn_in = 10'000;
  /// The parameter box is taken from the IMBayesOpt arm.
  AdaptationConfig adaptation;
  std::size_t policy_draws = kDefaultPolicyDraws;
  std::size_t grid_gamma = kDefaultGammaGrid;
  std::uint64_t master_seed = 0;
  std::size_t max_lag = 2000;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  const ArmSpec* find_arm(ArmKind kind) const;
  AdaptationConfig adaptation_for(const ArmSpec& arm) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Parses and validates a config file. Errors carry the 1-based line of the
/// problem.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Directory of bundled presets: $BAYESMC_PRESET_DIR if set, else the
/// compiled-in default.
std::filesystem::path preset_dir();
std::filesystem::path preset_path(const std::string& name);
std::vector<std::string> list_presets();

struct RunRecord {
  std::string arm;
  int run = 0;
  std::uint64_t seed = 0;
  SamplingTrace trace;
  double wall_seconds = 0.0;
  std::optional<MixturePolicy> policy;
  std::optional<AdaptationRecord> adaptation;
};

/// Seed for one (arm, run) unit.
std::uint64_t unit_seed(std::uint64_t master_seed, ArmKind arm, int run);

/// Uniform draw from S_n for the given run; shared by all arms.
BitState initial_state(const BoltzmannModel& model, const ConstraintSpec& spec,
                       std::uint64_t master_seed, int run);

/// Mixture policy an arm samples with. IMBayesOpt needs its adaptation record.
MixturePolicy arm_policy(const ExperimentConfig& config, const ArmSpec& arm,
                         const AdaptationRecord* adaptation, Rng& rng);

/// Runs one arm on one run index.
RunRecord run_unit(const ExperimentConfig& config, const BoltzmannModel& model, const ArmSpec& arm,
                   int run);

/// Every arm x run, on up to `jobs` threads. Output order is arm-major and
/// independent of scheduling.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);

struct ArmAggregate {
  std::string arm;
  std::size_t runs = 0;
  std::vector<double> acf_mean;    // index l - 1 for lag l
  std::vector<double> acf_stderr;  // sample std / sqrt(runs)
  std::vector<double> mean_energy; // per step, full trace
};

/// Per-arm ACF mean and standard error over runs, after dropping burn-in.
std::vector<ArmAggregate> aggregate_acf(const std::vector<RunRecord>& records,
                                        std::size_t burn_in, std::size_t max_lag);

/// Exact pi_n over S_n(c), keyed by packed state bits. Requires N <= 64.
class ExactDistribution {
 public:
  ExactDistribution(std::vector<std::uint64_t> keys, std::vector<double> probs);

  std::size_t size() const noexcept { return keys_.size(); }
  const std::vector<std::uint64_t>& keys() const noexcept { return keys_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  /// 0 for states outside S_n.
  double prob(std::uint64_t key) const;
  double prob(std::span<const std::uint8_t> bits) const;
  /// Position of `key` in keys(), or size() if absent.
  std::size_t index_of(std::uint64_t key) const;

 private:
  std::vector<std::uint64_t> keys_;  // sorted
  std::vector<double> probs_;
};

std::uint64_t pack_state(std::span<const std::uint8_t> bits);
Bits unpack_state(std::uint64_t key, std::size_t num_sites);

inline constexpr std::size_t kMaxEnumeratedStates = 2'000'000;

ExactDistribution exact_distribution(const BoltzmannModel& model, const ConstraintSpec& spec);

/// Advances a state by one transition.
using Kernel = std::function<void(BitState&)>;

/// Total variation between the post-burn-in state histogram of `steps`
/// kernel applications and the exact distribution. With no recorded samples
/// the histogram is a point mass on the current state.
double chain_vs_oracle(const BoltzmannModel& model, const ConstraintSpec& spec,
                       const Kernel& kernel, BitState start, std::size_t steps,
                       std::size_t burn_in = 0);

double total_variation(const ExactDistribution& exact,
                       const std::vector<std::pair<std::uint64_t, double>>& empirical);

}  // namespace bayesmc
