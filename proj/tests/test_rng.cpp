#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rsl/rng.hpp"

using namespace rsl;

TEST_CASE("uniform01 stays inside the open unit interval") {
  const auto key = rng::seed_key(7);
  double mn = 1.0, mx = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng::uniform01(key, i, 0, 0);
    mn = std::min(mn, u);
    mx = std::max(mx, u);
  }
  CHECK(mn > 0.0);
  CHECK(mx < 1.0);
}

TEST_CASE("uniform01 matches uniform moments") {
  const auto key = rng::seed_key(123);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng::uniform01(key, i, 0, 0);
    s += u;
    s2 += u * u;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::fabs(mean - 0.5) < 4.0 / std::sqrt(12.0 * n));  // 4 sigma
  CHECK(std::fabs(var - 1.0 / 12.0) < 5e-4);
}

TEST_CASE("counter words are pure functions of their arguments") {
  const auto key = rng::seed_key(99);
  CHECK(rng::word(key, 5, 7, 3) == rng::word(key, 5, 7, 3));
  CHECK(rng::word(key, 5, 7, 3) != rng::word(key, 5, 7, 4));
  CHECK(rng::word(key, 5, 7, 3) != rng::word(key, 6, 7, 3));
  CHECK(rng::word(key, 5, 7, 3) != rng::word(key, 5, 8, 3));
  CHECK(rng::seed_key(1) != rng::seed_key(2));
}

TEST_CASE("ziggurat base abscissa matches the 256-layer closure") {
  // The classical value for 256 layers.
  CHECK(rng::Ziggurat::instance().r() == doctest::Approx(3.6541528853611).epsilon(1e-9));
}

TEST_CASE("normal draws match standard-normal moments") {
  const auto key = rng::seed_key(2024);
  const int n = 2000000;
  double s = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng::normal(key, i, 0, 2);
    s += z;
    const double z2 = z * z;
    s2 += z2;
    s3 += z2 * z;
    s4 += z2 * z2;
  }
  const double mean = s / n, var = s2 / n;
  CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::fabs(s3 / n) < 4.0 * std::sqrt(15.0 / n));
  // Excess kurtosis of the standard normal is 0; variance of z^4 is 96.
  CHECK(std::fabs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("normal tail frequency beyond 3 matches the Gaussian tail") {
  const auto key = rng::seed_key(555);
  const int n = 4000000;
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (std::fabs(rng::normal(key, i, 1, 2)) > 3.0) ++hits;
  const double p = std::erfc(3.0 / std::sqrt(2.0));  // two-sided
  const double se = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::fabs(static_cast<double>(hits) / n - p) < 5.0 * se);
}
