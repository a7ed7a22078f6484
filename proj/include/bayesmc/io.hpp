#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "bayesmc/bayesopt.hpp"
#include "bayesmc/gp.hpp"
#include "bayesmc/harness.hpp"
#include "bayesmc/policy.hpp"

namespace bayesmc {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
/// Inverse of format_double; throws InvalidArgument on anything but a full number.
double parse_double(const std::string& text);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// step,energy,accepted,k_used,gamma_used
void write_run_csv(const std::filesystem::path& path, const SamplingTrace& trace);
SamplingTrace read_run_csv(const std::filesystem::path& path);

/// lag,acf_mean,acf_stderr
void write_acf_csv(const std::filesystem::path& path, const ArmAggregate& agg);
/// step,mean_energy
void write_energy_csv(const std::filesystem::path& path, const ArmAggregate& agg);
/// iteration,k,gamma,z,accept_rate
void write_adaptation_csv(const std::filesystem::path& path, const AdaptationRecord& record);
/// k,gamma,weight over the full support
void write_policy_csv(const std::filesystem::path& path, const MixturePolicy& policy);
/// draw,k,gamma
void write_draws_csv(const std::filesystem::path& path, const MixturePolicy& policy);
/// k,gamma,mu,sigma on {1..k_max} x grid_gamma points of [0, gamma_max]
void write_gp_surface_csv(const std::filesystem::path& path, const GPPosterior& gp,
                          const ParamBox& box, std::size_t grid_gamma);

/// Table values and step counts an experiment expands to.
nlohmann::json protocol_summary(const ExperimentConfig& config);

/// 64-bit FNV-1a of the canonical config dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Config, hash, seeds, protocol summary and per-unit metadata.
nlohmann::json experiment_manifest(const ExperimentConfig& config,
                                   const std::vector<RunRecord>& records);

/// Writes manifest.json, runs/<arm>_run<r>.csv, aggregate/, adaptation/ and
/// policy/ under `out_dir`.
void write_experiment(const std::filesystem::path& out_dir, const ExperimentConfig& config,
                      const std::vector<RunRecord>& records);

}  // namespace bayesmc
