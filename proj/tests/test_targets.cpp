#include <cmath>
#include <span>
#include <vector>

#include "doctest.h"
#include "rsl/rng.hpp"
#include "rsl/targets.hpp"

using namespace rsl;

namespace {

double grad1(const TargetModel& t, double x) { return t.gradient_at(x); }

double fd_gradient(const TargetModel& t, std::span<const double> x, int k, double h = 1e-5) {
  std::vector<double> a(x.begin(), x.end()), b(x.begin(), x.end());
  a[k] += h;
  b[k] -= h;
  return (t.potential(a) - t.potential(b)) / (2.0 * h);
}

}  // namespace

TEST_CASE("quadratic-logcosh closed forms") {
  const TargetModel t = make_quadratic_logcosh(1.0, 0.8);
  CHECK(grad1(t, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(grad1(t, 1.0) == doctest::Approx(1.0 + 0.8 * std::tanh(1.0)).epsilon(1e-12));
  CHECK(grad1(t, 1.0) == doctest::Approx(1.60928).epsilon(1e-5));
  CHECK(t.potential_at(0.0) == doctest::Approx(0.8 * std::log(2.0)).epsilon(1e-12));
  CHECK(t.potential_at(0.0) == doctest::Approx(0.55452).epsilon(1e-5));
  CHECK_THROWS_AS(make_quadratic_logcosh(0.0, 0.8), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic_logcosh(-1.0, 0.8), std::invalid_argument);
}

TEST_CASE("double-well drift values") {
  const TargetModel t = make_double_well();
  CHECK(-grad1(t, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(-grad1(t, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(t.potential_at(-1.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("logistic potential is stable and has the right gradient") {
  const TargetModel t = make_logistic();
  CHECK(grad1(t, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(grad1(t, 2.0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-12));
  CHECK(grad1(t, 2.0) == doctest::Approx(0.76159).epsilon(1e-5));
  CHECK(grad1(t, 500.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isfinite(t.potential_at(50.0)));
  CHECK(std::isfinite(t.potential_at(-50.0)));
  CHECK(std::isfinite(grad1(t, -50.0)));
}

TEST_CASE("2d mixture: critical point, normalization, bimodality") {
  const TargetModel t = make_mixture_2d();

  // Gradient descent from the origin lands on a critical point.
  std::vector<double> x = {0.0, 0.0}, g(2);
  for (int it = 0; it < 20000; ++it) {
    t.gradient(x, g);
    x[0] -= 0.01 * g[0];
    x[1] -= 0.01 * g[1];
  }
  t.gradient(x, g);
  CHECK(std::sqrt(g[0] * g[0] + g[1] * g[1]) <= 1e-8);

  // Density integrates to 1 over [-8,8]^2.
  const int n = 400;
  const double dx = 16.0 / n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p[2] = {-8.0 + (i + 0.5) * dx, -8.0 + (j + 0.5) * dx};
      mass += std::exp(-t.potential(std::span<const double>(p, 2))) * dx * dx;
    }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));

  // Bimodal: density at a component mean exceeds density at the saddle.
  const double mu1[2] = {-2.0, 0.0}, origin[2] = {0.0, 0.0};
  CHECK(t.potential(std::span<const double>(mu1, 2)) <
        t.potential(std::span<const double>(origin, 2)));
}

TEST_CASE("mixture spec validation") {
  MixtureSpec bad;
  bad.weights = {0.7, 0.7};
  bad.means = {{0.0, 0.0}, {1.0, 0.0}};
  bad.covariances = {{1.0, 0.0, 0.0, 1.0}, {1.0, 0.0, 0.0, 1.0}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  MixtureSpec notpd;
  notpd.weights = {0.5, 0.5};
  notpd.means = {{0.0, 0.0}, {1.0, 0.0}};
  notpd.covariances = {{1.0, 2.0, 2.0, 1.0}, {1.0, 0.0, 0.0, 1.0}};
  CHECK_THROWS_AS(notpd.validate(), std::invalid_argument);
}

TEST_CASE("ou flow closed form") {
  const TargetModel t = make_ou(1.0);
  double x = 1.0;
  t.drift_flow(std::span<double>(&x, 1), 0.0);
  CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
  x = 2.0;
  t.drift_flow(std::span<double>(&x, 1), 0.5);
  CHECK(x == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-12));
  CHECK(x == doctest::Approx(1.21306).epsilon(1e-5));
  CHECK_THROWS_AS(make_ou(0.0), std::invalid_argument);
}

TEST_CASE("gradient matches finite differences at random points") {
  const auto key = rng::seed_key(31337);
  int stream = 0;
  for (const char* name : {"quad-logcosh", "double-well", "logistic", "mog2d", "ou"}) {
    const TargetModel t = make_target_by_name(name);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> x(t.dim), g(t.dim);
      for (int k = 0; k < t.dim; ++k)
        x[k] = -5.0 + 10.0 * rng::uniform01(key, ++stream, 0, 0);
      t.gradient(x, g);
      for (int k = 0; k < t.dim; ++k) {
        const double fd = fd_gradient(t, x, k);
        const double scale = std::max(1.0, std::fabs(g[k]));
        CHECK(std::fabs(g[k] - fd) / scale <= 1e-6);
      }
    }
  }
}

TEST_CASE("exact flows compose (semigroup property)") {
  const TargetModel ou = make_ou(1.3);
  for (double x0 : {-2.0, 0.7, 3.0}) {
    double a = x0, b = x0;
    ou.drift_flow(std::span<double>(&a, 1), 0.3);
    ou.drift_flow(std::span<double>(&a, 1), 0.3);
    ou.drift_flow(std::span<double>(&b, 1), 0.6);
    CHECK(std::fabs(a - b) <= 1e-10);
  }
}

TEST_CASE("target registry names") {
  CHECK(make_target_by_name("quad-logcosh").dim == 1);
  CHECK(make_target_by_name("mog2d").dim == 2);
  CHECK_THROWS_AS(make_target_by_name("nope"), std::invalid_argument);
}
