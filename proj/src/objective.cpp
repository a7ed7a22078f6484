#include "bayesmc/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bayesmc/errors.hpp"

namespace bayesmc {

namespace {

void check_trace(std::span<const double> trace) {
  if (trace.empty()) throw InvalidArgument("energy trace is empty");
  for (double v : trace) {
    if (!std::isfinite(v)) throw InvalidArgument("energy trace contains a non-finite value");
  }
}

bool is_constant(std::span<const double> trace) {
  auto [lo, hi] = std::minmax_element(trace.begin(), trace.end());
  return *lo == *hi;
}

}  // namespace

double autocorr(std::span<const double> trace, long lag) {
  if (lag < 0) throw InvalidArgument("lag must be non-negative");
  check_trace(trace);
  if (is_constant(trace)) return 1.0;
  const std::size_t n = trace.size();
  const auto l = static_cast<std::size_t>(lag);
  if (l >= n) return 0.0;

  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : trace) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);

  double acc = 0.0;
  for (std::size_t t = 0; t + l < n; ++t) acc += (trace[t] - mean) * (trace[t + l] - mean);
  return acc / (static_cast<double>(n - l) * var);
}

std::vector<double> autocorr_curve(std::span<const double> trace, std::size_t max_lag) {
  check_trace(trace);
  std::vector<double> out(max_lag, 0.0);
  if (is_constant(trace)) {
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  const std::size_t n = trace.size();
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> c(n);
  double var = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    c[t] = trace[t] - mean;
    var += c[t] * c[t];
  }
  var /= static_cast<double>(n);
  for (std::size_t l = 1; l <= max_lag && l < n; ++l) {
    double acc = 0.0;
    for (std::size_t t = 0; t + l < n; ++t) acc += c[t] * c[t + l];
    out[l - 1] = acc / (static_cast<double>(n - l) * var);
  }
  return out;
}

double acf_area_score(std::span<const double> trace, long l_max) {
  if (l_max < 1) throw InvalidArgument("l_max must be >= 1");
  check_trace(trace);
  if (is_constant(trace)) return 0.0;
  double sum = 0.0;
  for (long l = 1; l <= l_max; ++l) sum += std::abs(autocorr(trace, l));
  return 1.0 - sum / static_cast<double>(l_max);
}

ObjectiveScore performance_criterion(std::span<const double> trace) {
  const std::size_t len = trace.size();
  if (len < kMinWindow) {
    throw TraceTooShort("performance criterion needs at least " + std::to_string(kMinWindow) +
                        " samples, got " + std::to_string(len));
  }
  check_trace(trace);

  // Work relative to the full-trace mean so the raw lag products below stay
  // well conditioned.
  double anchor = 0.0;
  for (double v : trace) anchor += v;
  anchor /= static_cast<double>(len);
  std::vector<double> y(len);
  for (std::size_t t = 0; t < len; ++t) y[t] = trace[t] - anchor;

  // prefix[t] = y[0] + ... + y[t-1]
  std::vector<double> prefix(len + 1, 0.0);
  for (std::size_t t = 0; t < len; ++t) prefix[t + 1] = prefix[t] + y[t];

  // lag_products[l] = sum over the current suffix of y[t] * y[t + l]. The
  // suffix grows one element at a time from the end of the trace.
  std::vector<double> lag_products(len, 0.0);
  double lo = trace[len - 1];
  double hi = trace[len - 1];
  double total = 0.0;

  for (std::size_t i = 1; i <= len; ++i) {
    const std::size_t start = len - i;
    const double front = y[start];
    for (std::size_t l = 1; l < i; ++l) lag_products[l] += front * y[start + l];
    lo = std::min(lo, trace[start]);
    hi = std::max(hi, trace[start]);
    if (i < kMinWindow) continue;
    if (lo == hi) continue;  // stuck window scores 0

    const double n = static_cast<double>(i);
    const double mean = (prefix[len] - prefix[start]) / n;
    double var = 0.0;
    for (std::size_t t = start; t < len; ++t) var += (y[t] - mean) * (y[t] - mean);
    var /= n;

    double abs_sum = 0.0;
    for (std::size_t l = 1; l < i; ++l) {
      const double head = prefix[len - l] - prefix[start];  // y[start .. len-l-1]
      const double tail = prefix[len] - prefix[start + l];  // y[start+l .. len-1]
      const double m = static_cast<double>(i - l);
      const double cov = lag_products[l] - mean * (head + tail) + m * mean * mean;
      abs_sum += std::abs(cov / (m * var));
    }
    total += 1.0 - abs_sum / n;
  }
  return {total / static_cast<double>(len - kMinWindow + 1), len};
}

}  // namespace bayesmc
