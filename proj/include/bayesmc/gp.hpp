#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "bayesmc/rng.hpp"

namespace bayesmc {

/// Observations (theta_i, z_i) with theta_i in the unit hypercube.
struct Dataset {
  std::size_t dim = 0;
  std::vector<Eigen::VectorXd> locations;
  std::vector<double> observations;

  explicit Dataset(std::size_t d = 0) : dim(d) {}

  std::size_t size() const noexcept { return observations.size(); }
  bool empty() const noexcept { return observations.empty(); }
  void add(Eigen::VectorXd location, double z);
  void validate() const;
};

/// ARD lengthscales psi and observation noise sigma_eta.
struct Hyperparams {
  Eigen::VectorXd lengthscales;
  double noise_std = 0.1;

  static Hyperparams defaults(std::size_t dim) {
    return {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), 0.3), 0.1};
  }
};

/// Search box and budget for maximum-likelihood hyperparameter fitting.
struct HyperBounds {
  double min_lengthscale = 0.01;
  double max_lengthscale = 10.0;
  double min_noise = 1e-4;
  double max_noise = 1.0;
  int restarts = 10;
  int evals_per_restart = 200;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// k(a, b) = exp(-1/2 (a - b)^T diag(psi)^-2 (a - b)).
double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Hyperparams& hyper);

/// Zero-mean GP conditioned on a dataset. Immutable once fitted.
class GPPosterior {
 public:
  GPPosterior(Dataset data, Hyperparams hyper);

  Prediction predict(const Eigen::VectorXd& theta) const;
  double log_marginal_likelihood() const;

  const Dataset& dataset() const noexcept { return data_; }
  const Hyperparams& hyper() const noexcept { return hyper_; }
  /// Lower Cholesky factor of K + sigma^2 I (plus any jitter that was needed).
  const Eigen::MatrixXd& chol_factor() const noexcept { return chol_; }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  double jitter() const noexcept { return jitter_; }

 private:
  Dataset data_;
  Hyperparams hyper_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

GPPosterior fit_posterior(Dataset data, Hyperparams hyper);
Prediction predict(const GPPosterior& post, const Eigen::VectorXd& theta);
double log_marginal_likelihood(const Dataset& data, const Hyperparams& hyper);

/// Multi-start coordinate search of the log marginal likelihood in log space.
/// Returns defaults when there are fewer than d + 2 observations.
Hyperparams fit_hyperparams(const Dataset& data, const HyperBounds& bounds, Rng& rng);

/// `count` points in [0,1]^d with one point per equal-width bin in each dimension.
std::vector<Eigen::VectorXd> latin_hypercube(std::size_t count, std::size_t dim, Rng& rng);

nlohmann::json gp_to_json(const GPPosterior& post);
GPPosterior gp_from_json(const nlohmann::json& j);

}  // namespace bayesmc
