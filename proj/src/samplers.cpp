#include "bayesmc/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bayesmc/errors.hpp"

namespace bayesmc {

void ParamBox::validate() const {
  if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
  if (!(gamma_max > 0.0) || !std::isfinite(gamma_max)) {
    throw InvalidArgument("gamma_max must be positive and finite");
  }
}

std::size_t max_walk_length(const ConstraintSpec& spec) {
  const std::size_t n = spec.hamming_distance;
  const std::size_t total = spec.reference.size();
  return n <= total ? std::min(n, total - n) : 0;
}

void check_walk_feasible(const ConstraintSpec& spec, int k) {
  const std::size_t n = spec.hamming_distance;
  const std::size_t total = spec.reference.size();
  if (n == 0 || n >= total) {
    throw NoValidMove("constraint n = " + std::to_string(n) + " of N = " + std::to_string(total) +
                      " admits no exchange moves");
  }
  if (k < 1 || static_cast<std::size_t>(k) > max_walk_length(spec)) {
    throw InfeasibleWalk("walk length " + std::to_string(k) + " exceeds min(n, N - n) = " +
                         std::to_string(max_walk_length(spec)));
  }
}

namespace {

/// Sites split by whether they differ from the reference (the "up" side).
struct CandidateLists {
  std::vector<std::size_t> up;
  std::vector<std::size_t> down;
};

CandidateLists split_sites(const BitState& state, const ConstraintSpec& spec) {
  if (state.size() != spec.reference.size()) {
    throw DimensionError("state length " + std::to_string(state.size()) +
                         " does not match reference length " +
                         std::to_string(spec.reference.size()));
  }
  CandidateLists lists;
  lists.up.reserve(spec.hamming_distance);
  lists.down.reserve(state.size() - std::min(state.size(), spec.hamming_distance));
  for (std::size_t s = 0; s < state.size(); ++s) {
    (state.bit(s) != spec.reference[s] ? lists.up : lists.down).push_back(s);
  }
  if (lists.up.size() != spec.hamming_distance) {
    throw InvalidArgument("state is at Hamming distance " + std::to_string(lists.up.size()) +
                          ", constraint requires " + std::to_string(spec.hamming_distance));
  }
  return lists;
}

/// Log weights gamma * dE for each candidate; returns the log normaliser.
double log_weights(const BitState& state, const std::vector<std::size_t>& candidates, double gamma,
                   std::vector<double>& out) {
  out.resize(candidates.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    out[c] = gamma * state.flip_delta(candidates[c]);
    top = std::max(top, out[c]);
  }
  double sum = 0.0;
  for (double& w : out) {
    w -= top;
    sum += std::exp(w);
  }
  return std::log(sum);
}

/// Draws a candidate with probability proportional to exp(gamma * dE), removes
/// it from the list, and returns (site, log probability).
std::pair<std::size_t, double> draw_candidate(const BitState& state,
                                              std::vector<std::size_t>& candidates, double gamma,
                                              Rng& rng, std::vector<double>& scratch) {
  std::size_t pick;
  double log_p;
  if (gamma == 0.0) {
    pick = rng.uniform_index(candidates.size());
    log_p = -std::log(static_cast<double>(candidates.size()));
  } else {
    const double log_norm = log_weights(state, candidates, gamma, scratch);
    const double target = rng.uniform() * std::exp(log_norm);
    double acc = 0.0;
    pick = candidates.size() - 1;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      acc += std::exp(scratch[c]);
      if (target < acc) {
        pick = c;
        break;
      }
    }
    log_p = scratch[pick] - log_norm;
  }
  const std::size_t site = candidates[pick];
  candidates[pick] = candidates.back();
  candidates.pop_back();
  return {site, log_p};
}

/// Log probability of choosing `site` from `candidates`; removes it.
double take_candidate(const BitState& state, std::vector<std::size_t>& candidates,
                      std::size_t site, double gamma, std::vector<double>& scratch) {
  auto it = std::find(candidates.begin(), candidates.end(), site);
  if (it == candidates.end()) {
    throw InvalidArgument("walk revisits or misuses site " + std::to_string(site));
  }
  const auto pos = static_cast<std::size_t>(it - candidates.begin());
  double log_p;
  if (gamma == 0.0) {
    log_p = -std::log(static_cast<double>(candidates.size()));
  } else {
    const double log_norm = log_weights(state, candidates, gamma, scratch);
    log_p = scratch[pos] - log_norm;
  }
  candidates[pos] = candidates.back();
  candidates.pop_back();
  return log_p;
}

}  // namespace

StepResult kawasaki_step(const BoltzmannModel& model, const ConstraintSpec& spec, BitState& state,
                         Rng& rng) {
  const std::size_t total = model.num_sites();
  if (state.size() != total || spec.reference.size() != total) {
    throw DimensionError("state, reference and model sizes differ");
  }
  const std::size_t n = spec.hamming_distance;
  if (n == 0 || n >= total) {
    throw NoValidMove("Kawasaki move impossible with n = " + std::to_string(n) + " of N = " +
                      std::to_string(total));
  }

  auto is_up = [&](std::size_t s) { return state.bit(s) != spec.reference[s]; };
  const std::size_t first = rng.uniform_index(total);
  const bool first_up = is_up(first);
  std::size_t second;
  do {
    second = rng.uniform_index(total);
  } while (is_up(second) == first_up);

  // dE of flipping `first`, then `second` with its field shifted by J_{first,second}.
  const double d_first = state.flip_delta(first);
  const double shift = model.coupling(first, second) * (state.bit(first) ? -1.0 : 1.0);
  const double d_second =
      (state.bit(second) ? 1.0 : -1.0) * (state.local_field(second) + shift);
  const double d_total = d_first + d_second;

  if (!mh_accept(-model.beta() * d_total, 0.0, rng)) return {false};
  state.flip(model, first);
  state.flip(model, second);
  return {true};
}

ProposalOutcome im_propose(const BoltzmannModel& model, const ConstraintSpec& spec,
                           const BitState& state, const SamplerParams& params, Rng& rng) {
  if (state.size() != model.num_sites()) throw DimensionError("state and model sizes differ");
  check_walk_feasible(spec, params.saw_length);
  if (!(params.energy_bias >= 0.0) || !std::isfinite(params.energy_bias)) {
    throw InvalidArgument("energy bias must be finite and >= 0");
  }

  ProposalOutcome out{state, 0.0, 0.0, {}};
  auto lists = split_sites(state, spec);
  std::vector<double> scratch;
  const double gamma = params.energy_bias;
  out.walk.reserve(static_cast<std::size_t>(params.saw_length));

  for (int step = 0; step < params.saw_length; ++step) {
    auto [down, lp_down] = draw_candidate(out.proposal, lists.up, gamma, rng, scratch);
    out.proposal.flip(model, down);
    auto [up, lp_up] = draw_candidate(out.proposal, lists.down, gamma, rng, scratch);
    out.proposal.flip(model, up);
    out.log_q_forward += lp_down + lp_up;
    out.walk.push_back({down, up});
  }

  out.log_q_reverse = im_walk_log_prob(model, spec, out.proposal, reverse_walk(out.walk), gamma);
  return out;
}

double im_walk_log_prob(const BoltzmannModel& model, const ConstraintSpec& spec,
                        const BitState& start, std::span<const Exchange> walk, double gamma) {
  BitState work = start;
  auto lists = split_sites(work, spec);
  std::vector<double> scratch;
  double log_q = 0.0;
  for (const auto& ex : walk) {
    log_q += take_candidate(work, lists.up, ex.down_site, gamma, scratch);
    work.flip(model, ex.down_site);
    log_q += take_candidate(work, lists.down, ex.up_site, gamma, scratch);
    work.flip(model, ex.up_site);
  }
  return log_q;
}

std::vector<Exchange> reverse_walk(std::span<const Exchange> walk) {
  std::vector<Exchange> rev;
  rev.reserve(walk.size());
  for (auto it = walk.rbegin(); it != walk.rend(); ++it) rev.push_back({it->up_site, it->down_site});
  return rev;
}

bool mh_accept(double log_pi_ratio, double log_q_ratio, Rng& rng) {
  const double total = log_pi_ratio + log_q_ratio;
  if (std::isnan(total)) throw InvalidRatio("acceptance ratio is NaN");
  if (total >= 0.0) return true;
  if (std::isinf(total)) return false;
  return std::log(rng.uniform_open()) < total;
}

StepResult im_step(const BoltzmannModel& model, const ConstraintSpec& spec, BitState& state,
                   const SamplerParams& params, Rng& rng) {
  auto outcome = im_propose(model, spec, state, params, rng);
  const double log_pi = -model.beta() * (outcome.proposal.energy() - state.energy());
  if (!mh_accept(log_pi, outcome.log_q_reverse - outcome.log_q_forward, rng)) return {false};
  state = std::move(outcome.proposal);
  return {true};
}

}  // namespace bayesmc
