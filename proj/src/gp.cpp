#include "bayesmc/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "bayesmc/errors.hpp"

namespace bayesmc {

namespace {

constexpr double kInitialJitter = 1e-10;
constexpr double kMaxJitter = 1e-6;
constexpr double kDomainTolerance = 1e-12;

void check_point(const Eigen::VectorXd& p, std::size_t dim) {
  if (static_cast<std::size_t>(p.size()) != dim) {
    throw DimensionError("point has dimension " + std::to_string(p.size()) + ", expected " +
                         std::to_string(dim));
  }
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (!(p[j] >= -kDomainTolerance && p[j] <= 1.0 + kDomainTolerance)) {
      throw InvalidArgument("point lies outside the unit hypercube");
    }
  }
}

Eigen::MatrixXd gram(const Dataset& data, const Hyperparams& hyper) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    k(a, a) = 1.0;
    for (Eigen::Index b = 0; b < a; ++b) {
      k(a, b) = k(b, a) = kernel(data.locations[static_cast<std::size_t>(a)],
                                 data.locations[static_cast<std::size_t>(b)], hyper);
    }
  }
  return k;
}

/// Cholesky of K + (sigma^2 + jitter) I with escalating jitter.
Eigen::MatrixXd factorize(Eigen::MatrixXd k, double noise_var, double& jitter_used) {
  const Eigen::VectorXd base = k.diagonal();
  for (double jitter = kInitialJitter; jitter <= kMaxJitter * 1.0000001; jitter *= 10.0) {
    k.diagonal() = base.array() + noise_var + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) {
      jitter_used = jitter;
      return llt.matrixL();
    }
  }
  throw NumericalError("covariance matrix is not positive definite even with jitter 1e-6");
}

void check_hyper(const Hyperparams& hyper, std::size_t dim) {
  if (static_cast<std::size_t>(hyper.lengthscales.size()) != dim) {
    throw DimensionError("lengthscale vector has the wrong dimension");
  }
  if (!(hyper.lengthscales.array() > 0.0).all() || !hyper.lengthscales.allFinite()) {
    throw InvalidArgument("lengthscales must be positive and finite");
  }
  if (!(hyper.noise_std > 0.0) || !std::isfinite(hyper.noise_std)) {
    throw InvalidArgument("noise_std must be positive and finite");
  }
}

}  // namespace

void Dataset::add(Eigen::VectorXd location, double z) {
  check_point(location, dim);
  if (!std::isfinite(z)) throw InvalidArgument("observation must be finite");
  locations.push_back(std::move(location));
  observations.push_back(z);
}

void Dataset::validate() const {
  if (locations.size() != observations.size()) {
    throw DimensionError("dataset has mismatched location and observation counts");
  }
  for (const auto& p : locations) check_point(p, dim);
  for (double z : observations) {
    if (!std::isfinite(z)) throw InvalidArgument("observation must be finite");
  }
}

double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Hyperparams& hyper) {
  if (a.size() != b.size() || a.size() != hyper.lengthscales.size()) {
    throw DimensionError("kernel arguments have mismatched dimensions");
  }
  const double q = ((a - b).array() / hyper.lengthscales.array()).square().sum();
  return std::exp(-0.5 * q);
}

GPPosterior::GPPosterior(Dataset data, Hyperparams hyper)
    : data_(std::move(data)), hyper_(std::move(hyper)) {
  data_.validate();
  check_hyper(hyper_, data_.dim);
  if (data_.empty()) return;
  chol_ = factorize(gram(data_, hyper_), hyper_.noise_std * hyper_.noise_std, jitter_);
  const Eigen::Map<const Eigen::VectorXd> z(data_.observations.data(),
                                            static_cast<Eigen::Index>(data_.size()));
  alpha_ = chol_.triangularView<Eigen::Lower>().solve(z);
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

Prediction GPPosterior::predict(const Eigen::VectorXd& theta) const {
  check_point(theta, data_.dim);
  if (data_.empty()) return {0.0, 1.0};
  const auto n = static_cast<Eigen::Index>(data_.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    k[a] = kernel(theta, data_.locations[static_cast<std::size_t>(a)], hyper_);
  }
  const double mean = k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  return {mean, std::max(0.0, 1.0 - v.squaredNorm())};
}

double GPPosterior::log_marginal_likelihood() const {
  if (data_.empty()) return 0.0;
  const Eigen::Map<const Eigen::VectorXd> z(data_.observations.data(),
                                            static_cast<Eigen::Index>(data_.size()));
  const double log_det_half = chol_.diagonal().array().log().sum();
  return -0.5 * z.dot(alpha_) - log_det_half -
         0.5 * static_cast<double>(data_.size()) * std::log(2.0 * std::numbers::pi);
}

GPPosterior fit_posterior(Dataset data, Hyperparams hyper) {
  return GPPosterior(std::move(data), std::move(hyper));
}

Prediction predict(const GPPosterior& post, const Eigen::VectorXd& theta) {
  return post.predict(theta);
}

double log_marginal_likelihood(const Dataset& data, const Hyperparams& hyper) {
  return GPPosterior(data, hyper).log_marginal_likelihood();
}

Hyperparams fit_hyperparams(const Dataset& data, const HyperBounds& bounds, Rng& rng) {
  const std::size_t d = data.dim;
  auto defaults = Hyperparams::defaults(d);
  if (data.size() < d + 2) return defaults;

  const auto np = static_cast<Eigen::Index>(d + 1);
  Eigen::VectorXd lo(np), hi(np);
  lo.head(np - 1).setConstant(std::log(bounds.min_lengthscale));
  hi.head(np - 1).setConstant(std::log(bounds.max_lengthscale));
  lo[np - 1] = std::log(bounds.min_noise);
  hi[np - 1] = std::log(bounds.max_noise);

  // Search in log space; clamp after exp so rounding cannot leave the box.
  auto unpack = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd ls = p.head(np - 1).array().exp().matrix();
    ls = ls.cwiseMax(bounds.min_lengthscale).cwiseMin(bounds.max_lengthscale);
    return Hyperparams{ls, std::clamp(std::exp(p[np - 1]), bounds.min_noise, bounds.max_noise)};
  };
  auto objective = [&](const Eigen::VectorXd& p) {
    try {
      const double v = log_marginal_likelihood(data, unpack(p));
      return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd best_p(np);
  best_p.head(np - 1) = defaults.lengthscales.array().log().matrix();
  best_p[np - 1] = std::log(defaults.noise_std);
  best_p = best_p.cwiseMax(lo).cwiseMin(hi);
  double best_f = objective(best_p);

  for (int restart = 0; restart < bounds.restarts; ++restart) {
    Eigen::VectorXd p(np);
    if (restart == 0) {
      p = best_p;
    } else {
      for (Eigen::Index j = 0; j < np; ++j) p[j] = lo[j] + (hi[j] - lo[j]) * rng.uniform();
    }
    double f = objective(p);
    int evals = 1;
    Eigen::VectorXd step = Eigen::VectorXd::Constant(np, 0.5);

    // Coordinate search: expand a coordinate's step on success, halve it on failure.
    while (evals < bounds.evals_per_restart && step.maxCoeff() > 1e-5) {
      for (Eigen::Index j = 0; j < np && evals < bounds.evals_per_restart; ++j) {
        bool improved = false;
        for (double dir : {1.0, -1.0}) {
          Eigen::VectorXd trial = p;
          trial[j] = std::clamp(p[j] + dir * step[j], lo[j], hi[j]);
          if (trial[j] == p[j]) continue;
          const double ft = objective(trial);
          ++evals;
          if (ft > f) {
            p = trial;
            f = ft;
            improved = true;
            break;
          }
          if (evals >= bounds.evals_per_restart) break;
        }
        step[j] *= improved ? 1.5 : 0.5;
      }
    }
    if (f > best_f) {
      best_f = f;
      best_p = p;
    }
  }
  if (!std::isfinite(best_f)) return defaults;
  return unpack(best_p);
}

std::vector<Eigen::VectorXd> latin_hypercube(std::size_t count, std::size_t dim, Rng& rng) {
  if (count < 1) throw InvalidArgument("latin hypercube needs at least one point");
  std::vector<Eigen::VectorXd> points(count, Eigen::VectorXd(static_cast<Eigen::Index>(dim)));
  std::vector<std::size_t> perm(count);
  for (std::size_t j = 0; j < dim; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t a = count; a > 1; --a) std::swap(perm[a - 1], perm[rng.uniform_index(a)]);
    for (std::size_t a = 0; a < count; ++a) {
      const double u = (static_cast<double>(perm[a]) + rng.uniform()) / static_cast<double>(count);
      points[a][static_cast<Eigen::Index>(j)] = std::min(u, std::nextafter(1.0, 0.0));
    }
  }
  return points;
}

nlohmann::json gp_to_json(const GPPosterior& post) {
  const auto& data = post.dataset();
  nlohmann::json locs = nlohmann::json::array();
  for (const auto& p : data.locations) locs.push_back(std::vector<double>(p.begin(), p.end()));
  const auto& ls = post.hyper().lengthscales;
  return {{"dim", data.dim},
          {"locations", std::move(locs)},
          {"observations", data.observations},
          {"lengthscales", std::vector<double>(ls.begin(), ls.end())},
          {"noise_std", post.hyper().noise_std}};
}

GPPosterior gp_from_json(const nlohmann::json& j) {
  try {
    const auto ls = j.at("lengthscales").get<std::vector<double>>();
    Dataset data(ls.size());
    const auto locs = j.at("locations").get<std::vector<std::vector<double>>>();
    const auto obs = j.at("observations").get<std::vector<double>>();
    if (locs.size() != obs.size()) throw DimensionError("GP snapshot has mismatched lengths");
    for (std::size_t a = 0; a < locs.size(); ++a) {
      data.add(Eigen::Map<const Eigen::VectorXd>(locs[a].data(),
                                                 static_cast<Eigen::Index>(locs[a].size())),
               obs[a]);
    }
    Hyperparams hyper{Eigen::Map<const Eigen::VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size())),
                      j.at("noise_std").get<double>()};
    return GPPosterior(std::move(data), std::move(hyper));
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidArgument(std::string("malformed GP snapshot: ") + ex.what());
  }
}

}  // namespace bayesmc
