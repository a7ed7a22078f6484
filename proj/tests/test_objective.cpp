#include <doctest.h>

#include <cmath>
#include <vector>

#include "bayesmc/errors.hpp"
#include "bayesmc/objective.hpp"
#include "bayesmc/rng.hpp"
#include "objective_oracle.hpp"

using namespace bayesmc;
using namespace bayesmc::testing;

namespace {

std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  double v = 0.0;
  for (auto& e : x) {
    v = phi * v + rng.normal();
    e = v;
  }
  return x;
}

}  // namespace

TEST_CASE("autocorr definitions") {
  const std::vector<double> alt{1, -1, 1, -1};
  CHECK(autocorr(alt, 0) == doctest::Approx(1.0));
  CHECK(autocorr(alt, 1) == doctest::Approx(-1.0));
  CHECK(autocorr(alt, 4) == 0.0);
  CHECK(autocorr(alt, 10) == 0.0);
  const std::vector<double> flat(7, 3.5);
  for (long l : {0L, 1L, 3L, 20L}) CHECK(autocorr(flat, l) == 1.0);
  CHECK_THROWS_AS(autocorr(alt, -1), InvalidArgument);
  CHECK_THROWS_AS(autocorr(std::vector<double>{}, 0), InvalidArgument);
  CHECK_THROWS_AS(autocorr(std::vector<double>{1.0, NAN}, 0), InvalidArgument);

  const auto x = ar1(300, 0.5, 3);
  CHECK(autocorr(x, 0) == doctest::Approx(1.0).epsilon(1e-14));
  const auto curve = autocorr_curve(x, 310);
  for (std::size_t l = 1; l <= 310; ++l) CHECK(std::abs(curve[l - 1] - naive_r(x, l)) < 1e-12);
}

TEST_CASE("acf area score") {
  CHECK(acf_area_score(std::vector<double>(10, 2.0), 5) == 0.0);
  CHECK(acf_area_score(std::vector<double>{1, -1, 1, -1}, 1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(acf_area_score(std::vector<double>{1, 2}, 0), InvalidArgument);
  Rng rng(17);
  std::vector<double> noise(10000);
  for (auto& v : noise) v = rng.normal();
  const double a = acf_area_score(noise, 50);
  CHECK(a >= 0.9);
  CHECK(a <= 1.0);
}

TEST_CASE("performance criterion matches the naive oracle") {
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    const auto x = ar1(100, 0.9, seed);
    const auto score = performance_criterion(x);
    CHECK(score.window_len == 100);
    CHECK(std::abs(score.value - naive_criterion(x)) < 1e-12);
  }
  // Large offset: the anchored lag sums must not lose precision.
  auto shifted = ar1(150, 0.7, 9);
  for (auto& v : shifted) v = -500.0 + 3.0 * v;
  CHECK(std::abs(performance_criterion(shifted).value - naive_criterion(shifted)) < 1e-12);
  // Energy-like traces with long flat stretches.
  std::vector<double> stepped;
  for (int i = 0; i < 120; ++i) stepped.push_back(-100.0 + ((i / 7) % 3) * 4.0);
  CHECK(std::abs(performance_criterion(stepped).value - naive_criterion(stepped)) < 1e-12);
  // Flat tail then motion: short windows are stuck and score zero.
  std::vector<double> tail_flat = ar1(60, 0.5, 10);
  for (int i = 0; i < 30; ++i) tail_flat.push_back(1.0);
  CHECK(std::abs(performance_criterion(tail_flat).value - naive_criterion(tail_flat)) < 1e-12);
}

TEST_CASE("performance criterion edge cases") {
  CHECK(performance_criterion(std::vector<double>(100, -7.0)).value == 0.0);
  const auto x = ar1(25, 0.3, 5);
  CHECK(performance_criterion(x).value == doctest::Approx(acf_area_score(x, 25)).epsilon(1e-14));
  CHECK_THROWS_AS(performance_criterion(std::vector<double>(24, 1.0)), TraceTooShort);
  CHECK(performance_criterion(ar1(200, 0.95, 6)).value <= 1.0);
}

TEST_CASE("shift and scale invariance") {
  const auto x = ar1(120, 0.8, 12);
  for (double c : {-3.0, 0.25, 1e3}) {
    std::vector<double> scaled(x), shifted(x);
    for (auto& v : scaled) v *= c;
    for (auto& v : shifted) v += c;
    for (long l : {1L, 5L, 60L}) {
      CHECK(std::abs(autocorr(scaled, l) - autocorr(x, l)) < 1e-9);
      CHECK(std::abs(autocorr(shifted, l) - autocorr(x, l)) < 1e-9);
    }
    CHECK(std::abs(acf_area_score(scaled, 40) - acf_area_score(x, 40)) < 1e-9);
    CHECK(std::abs(acf_area_score(shifted, 40) - acf_area_score(x, 40)) < 1e-9);
    CHECK(std::abs(performance_criterion(scaled).value - performance_criterion(x).value) < 1e-9);
    CHECK(std::abs(performance_criterion(shifted).value - performance_criterion(x).value) < 1e-9);
  }
}
