#include "bayesmc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bayesmc/errors.hpp"
#include "bayesmc/rng.hpp"

#ifndef BAYESMC_VERSION
#define BAYESMC_VERSION "0.0.0"
#endif

namespace bayesmc {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw InvalidArgument(path.string() + ": " + ex.what());
  }
}

void write_run_csv(const std::filesystem::path& path, const SamplingTrace& trace) {
  auto out = open_out(path);
  out << "step,energy,accepted,k_used,gamma_used\n";
  for (std::size_t s = 0; s < trace.energies.size(); ++s) {
    out << s << ',' << format_double(trace.energies[s]) << ',' << int(trace.accepted[s]) << ','
        << trace.k_used[s] << ',' << format_double(trace.gamma_used[s]) << '\n';
  }
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw InvalidArgument("not a number: '" + text + "'");
  }
  return v;
}

SamplingTrace read_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,energy", 0) != 0) {
    throw InvalidArgument(path.string() + ": missing run CSV header");
  }
  SamplingTrace trace;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field[5];
    for (auto& f : field) std::getline(ss, f, ',');
    try {
      trace.energies.push_back(parse_double(field[1]));
      trace.accepted.push_back(static_cast<std::uint8_t>(std::stoi(field[2])));
      trace.k_used.push_back(std::stoi(field[3]));
      trace.gamma_used.push_back(parse_double(field[4]));
    } catch (const std::exception&) {
      throw InvalidArgument(path.string() + ":" + std::to_string(row) + ": malformed row");
    }
  }
  return trace;
}

void write_acf_csv(const std::filesystem::path& path, const ArmAggregate& agg) {
  auto out = open_out(path);
  out << "lag,acf_mean,acf_stderr\n";
  for (std::size_t l = 0; l < agg.acf_mean.size(); ++l) {
    out << l + 1 << ',' << format_double(agg.acf_mean[l]) << ','
        << format_double(agg.acf_stderr[l]) << '\n';
  }
}

void write_energy_csv(const std::filesystem::path& path, const ArmAggregate& agg) {
  auto out = open_out(path);
  out << "step,mean_energy\n";
  for (std::size_t s = 0; s < agg.mean_energy.size(); ++s) {
    out << s << ',' << format_double(agg.mean_energy[s]) << '\n';
  }
}

void write_adaptation_csv(const std::filesystem::path& path, const AdaptationRecord& record) {
  auto out = open_out(path);
  out << "iteration,k,gamma,z,accept_rate\n";
  for (std::size_t i = 0; i < record.history.size(); ++i) {
    const auto& h = record.history[i];
    out << i + 1 << ',' << h.params.saw_length << ',' << format_double(h.params.energy_bias)
        << ',' << format_double(h.score) << ',' << format_double(h.accept_rate) << '\n';
  }
}

void write_policy_csv(const std::filesystem::path& path, const MixturePolicy& policy) {
  auto out = open_out(path);
  out << "k,gamma,weight\n";
  for (std::size_t a = 0; a < policy.support.size(); ++a) {
    out << policy.support[a].saw_length << ',' << format_double(policy.support[a].energy_bias)
        << ',' << format_double(policy.weights[a]) << '\n';
  }
}

void write_draws_csv(const std::filesystem::path& path, const MixturePolicy& policy) {
  auto out = open_out(path);
  out << "draw,k,gamma\n";
  for (std::size_t m = 0; m < policy.draws.size(); ++m) {
    out << m << ',' << policy.draws[m].saw_length << ','
        << format_double(policy.draws[m].energy_bias) << '\n';
  }
}

void write_gp_surface_csv(const std::filesystem::path& path, const GPPosterior& gp,
                          const ParamBox& box, std::size_t grid_gamma) {
  box.validate();
  if (grid_gamma < 1) throw InvalidArgument("gamma grid needs at least one point");
  auto out = open_out(path);
  out << "k,gamma,mu,sigma\n";
  for (int k = 1; k <= box.k_max; ++k) {
    for (std::size_t j = 0; j < grid_gamma; ++j) {
      const double g = grid_gamma == 1 ? 0.0
                                       : box.gamma_max * static_cast<double>(j) /
                                             static_cast<double>(grid_gamma - 1);
      const auto pred = gp.predict(normalize_params({k, g}, box));
      out << k << ',' << format_double(g) << ',' << format_double(pred.mean) << ','
          << format_double(std::sqrt(pred.variance)) << '\n';
    }
  }
}

json protocol_summary(const ExperimentConfig& config) {
  json arms = json::array();
  for (const auto& a : config.arms) {
    json arm = {{"arm", a.name()}};
    switch (a.kind) {
      case ArmKind::Kawasaki:
        arm["k_values"] = {1, 1};
        arm["gamma_values"] = {0.0, 0.0};
        break;
      case ArmKind::IMExpert:
        arm["k_values"] = {a.expert_k_min, a.expert_k_max};
        arm["gamma_values"] = {a.expert_gamma, a.expert_gamma};
        break;
      case ArmKind::IMUnif:
      case ArmKind::IMBayesOpt:
        arm["k_values"] = {1, a.box.k_max};
        arm["gamma_values"] = {0.0, a.box.gamma_max};
        break;
    }
    if (a.kind == ArmKind::IMBayesOpt) {
      const auto& ad = config.adaptation;
      arm["adaptation"] = {{"num_adaptations", ad.num_adaptations},
                           {"steps_per_adaptation", ad.steps_per_adaptation},
                           {"total_steps", static_cast<long long>(ad.num_adaptations) *
                                               ad.steps_per_adaptation}};
    }
    arms.push_back(std::move(arm));
  }
  const auto& m = config.model;
  json size;
  switch (m.topology) {
    case Topology::Grid2D: size = {m.width, m.height}; break;
    case Topology::Cube3D: size = {m.side, m.side, m.side}; break;
    case Topology::RBM: size = {{"visible", m.visible}, {"hidden", m.hidden}}; break;
    case Topology::Custom: break;
  }
  return {{"model",
           {{"topology", to_string(m.topology)},
            {"temperature", m.temperature},
            {"size", std::move(size)},
            {"n", m.hamming_distance},
            {"num_sites", m.num_sites()}}},
          {"arms", std::move(arms)},
          {"num_arms", config.arms.size()},
          {"num_runs", config.num_runs},
          {"steps_per_run", config.steps_per_run},
          {"burn_in", config.burn_in},
          {"total_units", config.arms.size() * static_cast<std::size_t>(config.num_runs)}};
}

std::string config_hash(const ExperimentConfig& config) {
  const auto h = hash_tag(config_to_json(config).dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json experiment_manifest(const ExperimentConfig& config, const std::vector<RunRecord>& records) {
  json units = json::array();
  json timing = json::array();
  for (const auto& r : records) {
    const std::string stem = r.arm + "_run" + std::to_string(r.run);
    units.push_back({{"arm", r.arm},
                     {"run", r.run},
                     {"seed", r.seed},
                     {"acceptance_rate", r.trace.acceptance_rate()},
                     {"steps", r.trace.energies.size()},
                     {"csv", "runs/" + stem + ".csv"}});
    timing.push_back({{"arm", r.arm}, {"run", r.run}, {"wall_seconds", r.wall_seconds}});
  }
  return {{"tool", "bayesmc"},
          {"version", BAYESMC_VERSION},
          {"config", config_to_json(config)},
          {"config_hash", config_hash(config)},
          {"master_seed", config.master_seed},
          {"protocol", protocol_summary(config)},
          {"units", std::move(units)},
          {"timing", std::move(timing)}};
}

void write_experiment(const std::filesystem::path& out_dir, const ExperimentConfig& config,
                      const std::vector<RunRecord>& records) {
  std::filesystem::create_directories(out_dir);
  for (const auto& r : records) {
    const std::string stem = r.arm + "_run" + std::to_string(r.run);
    write_run_csv(out_dir / "runs" / (stem + ".csv"), r.trace);
    if (r.policy) {
      write_policy_csv(out_dir / "policy" / (stem + "_weights.csv"), *r.policy);
      write_draws_csv(out_dir / "policy" / (stem + "_draws.csv"), *r.policy);
    }
    if (r.adaptation) {
      write_adaptation_csv(out_dir / "adaptation" / (stem + ".csv"), *r.adaptation);
      if (r.adaptation->gp_snapshot) {
        write_json(out_dir / "adaptation" / (stem + "_gp.json"),
                   gp_to_json(*r.adaptation->gp_snapshot));
      }
    }
  }

  if (config.num_runs >= 2) {
    const std::size_t post = config.steps_per_run - config.burn_in;
    const std::size_t max_lag = std::min(config.max_lag, post - 1);
    for (const auto& agg : aggregate_acf(records, config.burn_in, max_lag)) {
      write_acf_csv(out_dir / "aggregate" / (agg.arm + "_acf.csv"), agg);
      write_energy_csv(out_dir / "aggregate" / (agg.arm + "_energy.csv"), agg);
    }
  }

  write_json(out_dir / "manifest.json", experiment_manifest(config, records));
}

}  // namespace bayesmc
