#pragma once

#include <cstddef>
#include <vector>

#include "bayesmc/gp.hpp"
#include "bayesmc/model.hpp"
#include "bayesmc/rng.hpp"
#include "bayesmc/samplers.hpp"

namespace bayesmc {

/// Discrete distribution over parameter settings.
struct PolicyGrid {
  std::vector<SamplerParams> support;
  std::vector<double> weights;
};

/// Support and weights plus the M pre-drawn kernels used during sampling.
struct MixturePolicy {
  std::vector<SamplerParams> support;
  std::vector<double> weights;
  std::vector<SamplerParams> draws;
};

inline constexpr std::size_t kDefaultGammaGrid = 100;
inline constexpr std::size_t kDefaultPolicyDraws = 1000;

/// Weights proportional to exp(mu(theta)) over {1..k_max} x `grid_gamma`
/// evenly spaced gamma values in [0, gamma_max].
PolicyGrid build_boltzmann_policy(const GPPosterior& gp, const ParamBox& box,
                                  std::size_t grid_gamma = kDefaultGammaGrid);

/// Weights proportional to exp(log_weights), normalised with log-sum-exp.
std::vector<double> softmax(const std::vector<double>& log_weights);

/// M i.i.d. inverse-CDF draws with replacement.
MixturePolicy draw_policy(std::vector<SamplerParams> support, std::vector<double> weights,
                          std::size_t draws, Rng& rng);

/// Uniform over the box grid (IMUnif).
PolicyGrid uniform_policy(const ParamBox& box, std::size_t grid_gamma = kDefaultGammaGrid);
/// Fixed gamma, k uniform on {k_min..k_max} (IMExpert).
PolicyGrid expert_policy(int k_min, int k_max, double gamma);
/// Point mass on one setting; (1, 0) is the Kawasaki-equivalent kernel.
PolicyGrid point_policy(const SamplerParams& params);

struct SamplingTrace {
  std::vector<double> energies;
  std::vector<std::uint8_t> accepted;
  std::vector<int> k_used;
  std::vector<double> gamma_used;

  double acceptance_rate() const;
};

/// Throws InfeasibleWalk if any draw exceeds min(n, N - n).
void check_policy_feasible(const MixturePolicy& policy, const ConstraintSpec& spec);

/// Each step applies im_step with a uniformly chosen draw and records the
/// energy of the resulting state. `state` is advanced in place.
SamplingTrace sampling_phase(const BoltzmannModel& model, const ConstraintSpec& spec,
                             const MixturePolicy& policy, BitState& state, std::size_t num_steps,
                             Rng& rng);

}  // namespace bayesmc
