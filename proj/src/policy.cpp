#include "bayesmc/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bayesmc/bayesopt.hpp"
#include "bayesmc/errors.hpp"

namespace bayesmc {

namespace {

std::vector<double> gamma_grid(double gamma_max, std::size_t count) {
  if (count < 1) throw InvalidArgument("gamma grid needs at least one point");
  std::vector<double> g(count, 0.0);
  for (std::size_t j = 1; j < count; ++j) {
    g[j] = gamma_max * static_cast<double>(j) / static_cast<double>(count - 1);
  }
  return g;
}

}  // namespace

std::vector<double> softmax(const std::vector<double>& log_weights) {
  if (log_weights.empty()) throw InvalidArgument("empty weight vector");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> w(log_weights.size());
  // Neumaier summation keeps the total accurate for large grids.
  double sum = 0.0, comp = 0.0;
  for (std::size_t a = 0; a < w.size(); ++a) {
    w[a] = std::exp(log_weights[a] - top);
    const double t = sum + w[a];
    comp += std::abs(sum) >= w[a] ? (sum - t) + w[a] : (w[a] - t) + sum;
    sum = t;
  }
  sum += comp;
  for (double& x : w) x /= sum;
  return w;
}

PolicyGrid build_boltzmann_policy(const GPPosterior& gp, const ParamBox& box,
                                  std::size_t grid_gamma) {
  box.validate();
  PolicyGrid grid;
  std::vector<double> mu;
  for (int k = 1; k <= box.k_max; ++k) {
    for (double g : gamma_grid(box.gamma_max, grid_gamma)) {
      const SamplerParams p{k, g};
      grid.support.push_back(p);
      mu.push_back(gp.predict(normalize_params(p, box)).mean);
    }
  }
  grid.weights = softmax(mu);
  return grid;
}

MixturePolicy draw_policy(std::vector<SamplerParams> support, std::vector<double> weights,
                          std::size_t draws, Rng& rng) {
  if (draws < 1) throw InvalidArgument("policy needs at least one draw");
  if (support.empty() || support.size() != weights.size()) {
    throw InvalidArgument("policy support and weights must be non-empty and equal length");
  }
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t a = 0; a < weights.size(); ++a) {
    if (!(weights[a] >= 0.0) || !std::isfinite(weights[a])) {
      throw InvalidArgument("policy weights must be finite and non-negative");
    }
    acc += weights[a];
    cdf[a] = acc;
  }
  if (!(acc > 0.0)) throw InvalidArgument("policy weights sum to zero");

  MixturePolicy policy{std::move(support), std::move(weights), {}};
  policy.draws.reserve(draws);
  for (std::size_t m = 0; m < draws; ++m) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    // Skip zero-weight entries that share the CDF value of their predecessor.
    auto idx = static_cast<std::size_t>(it - cdf.begin());
    while (policy.weights[idx] == 0.0 && idx + 1 < cdf.size()) ++idx;
    policy.draws.push_back(policy.support[idx]);
  }
  return policy;
}

PolicyGrid uniform_policy(const ParamBox& box, std::size_t grid_gamma) {
  box.validate();
  PolicyGrid grid;
  for (int k = 1; k <= box.k_max; ++k) {
    for (double g : gamma_grid(box.gamma_max, grid_gamma)) grid.support.push_back({k, g});
  }
  grid.weights.assign(grid.support.size(), 1.0 / static_cast<double>(grid.support.size()));
  return grid;
}

PolicyGrid expert_policy(int k_min, int k_max, double gamma) {
  if (k_min < 1 || k_max < k_min) throw InvalidArgument("expert k range is empty");
  if (!(gamma >= 0.0)) throw InvalidArgument("expert gamma must be >= 0");
  PolicyGrid grid;
  for (int k = k_min; k <= k_max; ++k) grid.support.push_back({k, gamma});
  grid.weights.assign(grid.support.size(), 1.0 / static_cast<double>(grid.support.size()));
  return grid;
}

PolicyGrid point_policy(const SamplerParams& params) { return {{params}, {1.0}}; }

double SamplingTrace::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  const auto n = std::accumulate(accepted.begin(), accepted.end(), std::size_t{0});
  return static_cast<double>(n) / static_cast<double>(accepted.size());
}

void check_policy_feasible(const MixturePolicy& policy, const ConstraintSpec& spec) {
  if (policy.draws.empty()) throw InvalidArgument("policy has no draws");
  int k_max = 0;
  for (const auto& p : policy.draws) k_max = std::max(k_max, p.saw_length);
  check_walk_feasible(spec, k_max);
}

SamplingTrace sampling_phase(const BoltzmannModel& model, const ConstraintSpec& spec,
                             const MixturePolicy& policy, BitState& state, std::size_t num_steps,
                             Rng& rng) {
  check_policy_feasible(policy, spec);
  SamplingTrace trace;
  trace.energies.reserve(num_steps);
  trace.accepted.reserve(num_steps);
  trace.k_used.reserve(num_steps);
  trace.gamma_used.reserve(num_steps);
  for (std::size_t s = 0; s < num_steps; ++s) {
    const auto& params = policy.draws[rng.uniform_index(policy.draws.size())];
    const bool ok = im_step(model, spec, state, params, rng).accepted;
    trace.energies.push_back(state.energy());
    trace.accepted.push_back(ok ? 1 : 0);
    trace.k_used.push_back(params.saw_length);
    trace.gamma_used.push_back(params.energy_bias);
  }
  return trace;
}

}  // namespace bayesmc
