#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bayesmc/errors.hpp"
#include "bayesmc/gp.hpp"
#include "bayesmc/model.hpp"
#include "bayesmc/rng.hpp"
#include "bayesmc/samplers.hpp"

namespace bayesmc {

/// Expected improvement over `best` for maximisation, with exploration offset xi.
double expected_improvement(double mean, double std, double best, double xi);

struct DirectResult {
  Eigen::VectorXd point;
  double value = 0.0;
  std::size_t evaluations = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// DIviding RECTangles maximisation over [0,1]^d. Deterministic; never
/// evaluates more than `budget` points.
DirectResult direct_maximize(const Objective& objective, std::size_t dim, std::size_t budget);

/// (k, gamma) <-> [0,1]^2. k is rounded to the nearest integer in {1..k_max}.
Eigen::VectorXd normalize_params(const SamplerParams& p, const ParamBox& box);
SamplerParams denormalize_params(const Eigen::VectorXd& u, const ParamBox& box);

struct AdaptationConfig {
  int num_adaptations = 100;
  int steps_per_adaptation = 100;
  int init_design_size = 10;
  ParamBox param_box;
  double ei_exploration = 0.01;
  int direct_budget = 500;
  /// Hyperparameters are refit after the initial design and then every
  /// `refit_every` iterations.
  int refit_every = 10;
  /// Restart each evaluation from the initial state instead of continuing the chain.
  bool restart_chain = false;
  HyperBounds hyper_bounds;

  void validate() const;
};

struct AdaptationStep {
  SamplerParams params;
  double score = 0.0;
  double accept_rate = 0.0;
  /// Largest EI seen in the acquisition round that chose these params;
  /// empty for initial-design points.
  std::optional<double> acquisition = std::nullopt;
};

struct AdaptationRecord {
  std::vector<AdaptationStep> history;
  std::optional<GPPosterior> gp_snapshot;
  std::optional<BitState> final_state;
  /// Energies of every chain step taken during adaptation.
  std::vector<double> energies;
};

/// Raised when adaptation aborts; carries everything recorded so far.
class AdaptationError : public Error {
 public:
  AdaptationError(const std::string& what, AdaptationRecord partial)
      : Error(what), partial_(std::move(partial)) {}
  const AdaptationRecord& partial() const noexcept { return partial_; }

 private:
  AdaptationRecord partial_;
};

/// Runs the chain L steps with `params`, returning the score of those L energies.
AdaptationStep evaluate_params(const BoltzmannModel& model, const ConstraintSpec& spec,
                               BitState& state, const SamplerParams& params, int steps, Rng& rng,
                               std::vector<double>* energies = nullptr);

/// Bayesian-optimisation adaptation of the IM sampler parameters.
AdaptationRecord adapt(const BoltzmannModel& model, const ConstraintSpec& spec,
                       const AdaptationConfig& config, const BitState& initial_state, Rng& rng);

}  // namespace bayesmc
