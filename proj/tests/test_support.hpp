// Shared helpers for the unit tests: small models and brute-force oracles.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "bayesmc/model.hpp"
#include "bayesmc/rng.hpp"

namespace bayesmc::testing {

/// Dense random model: every pair coupled with J ~ N(0, 1), biases ~ N(0, 0.5).
inline BoltzmannModel random_dense_model(std::size_t n, double beta, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, rng.normal()});
  }
  std::vector<double> biases(n);
  for (auto& b : biases) b = 0.5 * rng.normal();
  return BoltzmannModel(n, std::move(edges), std::move(biases), beta);
}

/// Energy by the double loop over the dense coupling matrix, independent of
/// the adjacency structure.
inline double brute_energy(const BoltzmannModel& model, const Bits& x) {
  const std::size_t n = model.num_sites();
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) e -= model.coupling(i, j) * x[i] * x[j];
    e -= model.biases()[i] * x[i];
  }
  return e;
}

/// All bit vectors of length n with exactly `ones` ones.
inline std::vector<Bits> all_states(std::size_t n, std::size_t ones) {
  std::vector<Bits> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != ones) continue;
    Bits b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = (mask >> i) & 1U;
    out.push_back(std::move(b));
  }
  return out;
}

inline Bits random_state(std::size_t n, std::size_t ones, Rng& rng) {
  Bits b(n, 0);
  std::size_t placed = 0;
  while (placed < ones) {
    const auto i = rng.uniform_index(n);
    if (!b[i]) {
      b[i] = 1;
      ++placed;
    }
  }
  return b;
}

}  // namespace bayesmc::testing
