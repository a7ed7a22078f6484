#include "bayesmc/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "bayesmc/objective.hpp"

namespace bayesmc {

double expected_improvement(double mean, double std, double best, double xi) {
  if (std::isnan(mean) || std::isnan(std) || std::isnan(best) || std::isnan(xi)) {
    throw InvalidArgument("expected improvement got a NaN input");
  }
  if (std < 0.0) throw InvalidArgument("standard deviation must be non-negative");
  const double gain = mean - best - xi;
  if (std == 0.0) return std::max(0.0, gain);
  const double u = gain / std;
  const double cdf = 0.5 * std::erfc(-u / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, std * (u * cdf + pdf));
}

// ---------------------------------------------------------------------------
// DIRECT

namespace {

constexpr double kDirectEpsilon = 1e-4;

struct Rect {
  Eigen::VectorXd center;
  std::vector<int> level;  // number of trisections along each dimension
  double value;            // objective at the centre (maximised)
  double size;             // centre-to-vertex distance
};

double rect_size(const std::vector<int>& level) {
  std::vector<int> sorted = level;
  std::sort(sorted.begin(), sorted.end());
  double sq = 0.0;
  for (int l : sorted) sq += std::pow(9.0, -l);
  return 0.5 * std::sqrt(sq);
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Larger rectangles first, then higher value, then lexicographically smaller centre.
bool rect_before(const Rect& a, const Rect& b) {
  if (a.size != b.size) return a.size > b.size;
  if (a.value != b.value) return a.value > b.value;
  return lex_less(a.center, b.center);
}

std::vector<std::size_t> potentially_optimal(const std::vector<Rect>& rects, double best) {
  // Best rectangle within each size class.
  std::map<double, std::size_t> rep;
  for (std::size_t r = 0; r < rects.size(); ++r) {
    auto [it, inserted] = rep.try_emplace(rects[r].size, r);
    if (!inserted && rect_before(rects[r], rects[it->second])) it->second = r;
  }
  std::vector<std::size_t> reps;
  for (const auto& [size, r] : rep) reps.push_back(r);

  const double target = best + kDirectEpsilon * std::abs(best);
  std::vector<std::size_t> chosen;
  for (std::size_t j : reps) {
    const Rect& rj = rects[j];
    double k_low = 0.0;
    double k_high = std::numeric_limits<double>::infinity();
    for (std::size_t i : reps) {
      if (i == j) continue;
      const Rect& ri = rects[i];
      // Maximisation form: rj.value + K rj.size >= ri.value + K ri.size.
      const double slope = (ri.value - rj.value) / (rj.size - ri.size);
      if (ri.size < rj.size) {
        k_low = std::max(k_low, slope);
      } else {
        k_high = std::min(k_high, slope);
      }
    }
    if (k_high <= 0.0 || k_low > k_high) continue;
    if (std::isfinite(k_high) && rj.value + k_high * rj.size < target) continue;
    chosen.push_back(j);
  }
  std::sort(chosen.begin(), chosen.end(),
            [&](std::size_t a, std::size_t b) { return rect_before(rects[a], rects[b]); });
  return chosen;
}

}  // namespace

DirectResult direct_maximize(const Objective& objective, std::size_t dim, std::size_t budget) {
  if (budget < 1) throw InvalidArgument("DIRECT budget must be >= 1");
  if (dim < 1) throw InvalidArgument("DIRECT needs at least one dimension");

  DirectResult result;
  auto evaluate = [&](const Eigen::VectorXd& x) {
    const double v = objective(x);
    ++result.evaluations;
    if (result.evaluations == 1 || v > result.value) {
      result.value = v;
      result.point = x;
    }
    return v;
  };

  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<Rect> rects;
  {
    Eigen::VectorXd c = Eigen::VectorXd::Constant(d, 0.5);
    std::vector<int> level(dim, 0);
    const double v = evaluate(c);
    rects.push_back({std::move(c), level, v, rect_size(level)});
  }

  bool exhausted = false;
  while (!exhausted && result.evaluations < budget) {
    const auto selected = potentially_optimal(rects, result.value);
    if (selected.empty()) break;
    bool divided_any = false;
    for (std::size_t idx : selected) {
      const int min_level = *std::min_element(rects[idx].level.begin(), rects[idx].level.end());
      std::vector<Eigen::Index> long_dims;
      for (std::size_t j = 0; j < dim; ++j) {
        if (rects[idx].level[j] == min_level) long_dims.push_back(static_cast<Eigen::Index>(j));
      }
      if (result.evaluations + 2 * long_dims.size() > budget) {
        exhausted = true;
        break;
      }
      const double delta = std::pow(3.0, -(min_level + 1));

      struct Probe {
        Eigen::Index dim;
        double best;
        Rect lo, hi;
      };
      std::vector<Probe> probes;
      for (Eigen::Index j : long_dims) {
        Eigen::VectorXd lo = rects[idx].center;
        Eigen::VectorXd hi = rects[idx].center;
        lo[j] -= delta;
        hi[j] += delta;
        const double vlo = evaluate(lo);
        const double vhi = evaluate(hi);
        probes.push_back({j, std::max(vlo, vhi), {std::move(lo), {}, vlo, 0.0},
                          {std::move(hi), {}, vhi, 0.0}});
      }
      // Split the most promising dimension first so its children get the largest boxes.
      std::stable_sort(probes.begin(), probes.end(),
                       [](const Probe& a, const Probe& b) { return a.best > b.best; });
      for (auto& p : probes) {
        rects[idx].level[static_cast<std::size_t>(p.dim)] += 1;
        for (Rect* child : {&p.lo, &p.hi}) {
          child->level = rects[idx].level;
          child->size = rect_size(child->level);
          rects.push_back(std::move(*child));
        }
      }
      rects[idx].size = rect_size(rects[idx].level);
      divided_any = true;
    }
    if (!divided_any) break;
  }
  return result;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd normalize_params(const SamplerParams& p, const ParamBox& box) {
  Eigen::VectorXd u(2);
  u[0] = box.k_max > 1 ? static_cast<double>(p.saw_length - 1) / (box.k_max - 1) : 0.0;
  u[1] = p.energy_bias / box.gamma_max;
  return u.cwiseMax(0.0).cwiseMin(1.0);
}

SamplerParams denormalize_params(const Eigen::VectorXd& u, const ParamBox& box) {
  if (u.size() != 2) throw DimensionError("parameter point must be two-dimensional");
  const double uk = std::clamp(u[0], 0.0, 1.0);
  const double ug = std::clamp(u[1], 0.0, 1.0);
  const int k = 1 + static_cast<int>(std::lround(uk * (box.k_max - 1)));
  return {std::clamp(k, 1, box.k_max), ug * box.gamma_max};
}

void AdaptationConfig::validate() const {
  param_box.validate();
  if (init_design_size < 1) throw InvalidArgument("init_design_size must be >= 1");
  if (num_adaptations < init_design_size) {
    throw InvalidArgument("num_adaptations must be >= init_design_size");
  }
  if (steps_per_adaptation < static_cast<int>(kMinWindow)) {
    throw InvalidArgument("steps_per_adaptation must be >= 25");
  }
  if (!(ei_exploration >= 0.0)) throw InvalidArgument("ei_exploration must be >= 0");
  if (direct_budget < 1) throw InvalidArgument("direct_budget must be >= 1");
  if (refit_every < 1) throw InvalidArgument("refit_every must be >= 1");
}

AdaptationStep evaluate_params(const BoltzmannModel& model, const ConstraintSpec& spec,
                               BitState& state, const SamplerParams& params, int steps, Rng& rng,
                               std::vector<double>* energies) {
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(steps));
  int accepted = 0;
  for (int s = 0; s < steps; ++s) {
    accepted += im_step(model, spec, state, params, rng).accepted;
    trace.push_back(state.energy());
  }
  AdaptationStep step{params, performance_criterion(trace).value,
                      static_cast<double>(accepted) / steps};
  if (energies) energies->insert(energies->end(), trace.begin(), trace.end());
  return step;
}

AdaptationRecord adapt(const BoltzmannModel& model, const ConstraintSpec& spec,
                       const AdaptationConfig& config, const BitState& initial_state, Rng& rng) {
  config.validate();
  check_walk_feasible(spec, config.param_box.k_max);
  if (!satisfies_constraint(initial_state.bits(), spec)) {
    throw InvalidArgument("initial state violates the constraint");
  }

  Rng chain_rng = rng.split("chain");
  Rng design_rng = rng.split("design");
  Rng hyper_rng = rng.split("hyper");

  AdaptationRecord record;
  record.energies.reserve(static_cast<std::size_t>(config.num_adaptations) *
                          static_cast<std::size_t>(config.steps_per_adaptation));
  BitState state = initial_state;
  Dataset data(2);
  Hyperparams hyper = Hyperparams::defaults(2);
  const auto design = latin_hypercube(static_cast<std::size_t>(config.init_design_size), 2,
                                      design_rng);

  try {
    for (int i = 0; i < config.num_adaptations; ++i) {
      SamplerParams params;
      std::optional<double> acquisition;
      if (i < config.init_design_size) {
        params = denormalize_params(design[static_cast<std::size_t>(i)], config.param_box);
      } else {
        if ((i - config.init_design_size) % config.refit_every == 0) {
          hyper = fit_hyperparams(data, config.hyper_bounds, hyper_rng);
        }
        const GPPosterior post(data, hyper);
        const double best = *std::max_element(data.observations.begin(), data.observations.end());
        auto ei = [&](const Eigen::VectorXd& u) {
          const auto pred = post.predict(u);
          return expected_improvement(pred.mean, std::sqrt(pred.variance), best,
                                      config.ei_exploration);
        };
        const auto found =
            direct_maximize(ei, 2, static_cast<std::size_t>(config.direct_budget));
        params = denormalize_params(found.point, config.param_box);
        acquisition = found.value;
      }

      if (config.restart_chain) state = initial_state;
      auto step = evaluate_params(model, spec, state, params, config.steps_per_adaptation,
                                  chain_rng, &record.energies);
      step.acquisition = acquisition;
      data.add(normalize_params(params, config.param_box), step.score);
      record.history.push_back(step);
    }
    hyper = fit_hyperparams(data, config.hyper_bounds, hyper_rng);
    record.gp_snapshot.emplace(data, hyper);
  } catch (const Error& ex) {
    record.final_state = state;
    throw AdaptationError(std::string("adaptation aborted at iteration ") +
                              std::to_string(record.history.size()) + ": " + ex.what(),
                          std::move(record));
  }
  record.final_state = std::move(state);
  return record;
}

}  // namespace bayesmc
