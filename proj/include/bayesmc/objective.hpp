#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bayesmc {

/// Sliding-window mixing score of a trace.
struct ObjectiveScore {
  double value = 0.0;
  std::size_t window_len = 0;
};

/// Shortest window used by performance_criterion.
inline constexpr std::size_t kMinWindow = 25;

/// Lag-l autocorrelation normalised by (n - l) times the population variance.
/// Returns 0 for l >= n and 1 for a constant trace.
double autocorr(std::span<const double> trace, long lag);

/// autocorr for lags 1..max_lag, sharing one mean/variance pass.
std::vector<double> autocorr_curve(std::span<const double> trace, std::size_t max_lag);

/// 1 - mean_{l = 1..l_max} |autocorr(trace, l)|.
double acf_area_score(std::span<const double> trace, long l_max);

/// Mean of acf_area_score(E_i, i) over the suffixes E_i of length
/// i = 25..L, each suffix treated as a standalone sequence.
ObjectiveScore performance_criterion(std::span<const double> trace);

}  // namespace bayesmc
