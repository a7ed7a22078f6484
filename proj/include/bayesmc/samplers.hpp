#pragma once

#include <cstddef>
#include <vector>

#include "bayesmc/model.hpp"
#include "bayesmc/rng.hpp"

namespace bayesmc {

/// theta = (k, gamma): walk length and energy bias of the IM proposal.
struct SamplerParams {
  int saw_length = 1;
  double energy_bias = 0.0;

  friend bool operator==(const SamplerParams&, const SamplerParams&) = default;
};

/// Theta = {1..k_max} x [0, gamma_max].
struct ParamBox {
  int k_max = 1;
  double gamma_max = 1.0;

  void validate() const;
  bool contains(const SamplerParams& p) const {
    return p.saw_length >= 1 && p.saw_length <= k_max && p.energy_bias >= 0.0 &&
           p.energy_bias <= gamma_max;
  }
};

/// One step of a walk: `down_site` leaves the constrained set's "up" side,
/// `up_site` joins it. For an all-zeros reference that is 1 -> 0 then 0 -> 1.
struct Exchange {
  std::size_t down_site;
  std::size_t up_site;

  friend bool operator==(const Exchange&, const Exchange&) = default;
};

struct ProposalOutcome {
  BitState proposal;
  double log_q_forward = 0.0;
  double log_q_reverse = 0.0;
  std::vector<Exchange> walk;
};

struct StepResult {
  bool accepted = false;
};

/// Largest feasible walk length on S_n: min(n, N - n).
std::size_t max_walk_length(const ConstraintSpec& spec);

/// Throws if the constraint has no exchange moves or `k` exceeds min(n, N - n).
void check_walk_feasible(const ConstraintSpec& spec, int k);

/// Kawasaki exchange: flip a uniform bit, then a uniform bit among those that
/// restore the constraint (never the first bit), then Metropolis accept.
StepResult kawasaki_step(const BoltzmannModel& model, const ConstraintSpec& spec, BitState& state,
                         Rng& rng);

/// Self-avoiding exchange walk of length k with intermediate-energy bias gamma.
ProposalOutcome im_propose(const BoltzmannModel& model, const ConstraintSpec& spec,
                           const BitState& state, const SamplerParams& params, Rng& rng);

/// Log probability of generating `walk` from `start` under the IM rule.
/// `start` is left unchanged on return.
double im_walk_log_prob(const BoltzmannModel& model, const ConstraintSpec& spec,
                        const BitState& start, std::span<const Exchange> walk, double gamma);

/// Walk that undoes `walk` when replayed from its end state.
std::vector<Exchange> reverse_walk(std::span<const Exchange> walk);

/// Accept with probability min(1, exp(log_pi_ratio + log_q_ratio)).
bool mh_accept(double log_pi_ratio, double log_q_ratio, Rng& rng);

/// IM proposal followed by the Metropolis-Hastings correction. On rejection
/// the state is untouched.
StepResult im_step(const BoltzmannModel& model, const ConstraintSpec& spec, BitState& state,
                   const SamplerParams& params, Rng& rng);

}  // namespace bayesmc
