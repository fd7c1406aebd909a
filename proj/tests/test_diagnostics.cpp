#include <cmath>
#include <vector>

#include "doctest.h"
#include "rsl/diagnostics.hpp"
#include "rsl/rng.hpp"
#include "rsl/targets.hpp"

using namespace rsl;

TEST_CASE("ou variance recursion fixed points") {
  const double tau = 0.5;
  const auto rslmc = ou_mean_variance_recursion(0.0, 1.0, 1.0, tau, 1, Scheme::rslmc);
  CHECK(rslmc.fixed_point == doctest::Approx(tau / std::tanh(tau)).epsilon(1e-12));
  CHECK(rslmc.fixed_point == doctest::Approx(1.08198).epsilon(1e-5));

  const auto df = ou_mean_variance_recursion(0.0, 1.0, 1.0, tau, 1, Scheme::lt_drift_first);
  CHECK(df.fixed_point ==
        doctest::Approx(2.0 * tau / (1.0 - std::exp(-2.0 * tau))).epsilon(1e-12));
  CHECK(df.fixed_point == doctest::Approx(1.58198).epsilon(1e-5));

  const auto dfu =
      ou_mean_variance_recursion(0.0, 1.0, 1.0, tau, 1, Scheme::lt_diffusion_first);
  CHECK(dfu.fixed_point ==
        doctest::Approx(std::exp(-2.0 * tau) * 2.0 * tau / (1.0 - std::exp(-2.0 * tau)))
            .epsilon(1e-12));

  const auto lmc = ou_mean_variance_recursion(0.0, 1.0, 1.0, 0.1, 1, Scheme::lmc_euler);
  CHECK(lmc.fixed_point == doctest::Approx(1.0 / (1.0 - 0.05)).epsilon(1e-12));
  CHECK(lmc.fixed_point == doctest::Approx(1.05263).epsilon(1e-5));

  const auto st =
      ou_mean_variance_recursion(0.0, 1.0, 1.0, tau, 1, Scheme::strang_symmetric);
  CHECK(st.fixed_point == doctest::Approx(tau / std::sinh(tau)).epsilon(1e-12));
  CHECK(st.fixed_point == doctest::Approx(0.9595174).epsilon(1e-6));

  // Continuum limit: every fixed point tends to 1/(beta lambda).
  for (Scheme s : {Scheme::rslmc, Scheme::lmc_euler, Scheme::lt_drift_first,
                   Scheme::lt_diffusion_first, Scheme::strang_symmetric}) {
    const auto r = ou_mean_variance_recursion(0.0, 2.0, 1.5, 1e-5, 1, s);
    CHECK(r.fixed_point == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  }

  // Recursion converges to the fixed point.
  const auto run = ou_mean_variance_recursion(0.0, 1.0, 1.0, 0.5, 200, Scheme::rslmc);
  CHECK(run.variance == doctest::Approx(run.fixed_point).epsilon(1e-12));
}

TEST_CASE("rslmc bias is second order, fixed order first order") {
  // (tau/beta) coth(lambda tau) - 1/(beta lambda) ~ lambda tau^2 / (3 beta).
  const double bias1 =
      ou_mean_variance_recursion(0, 1, 1, 0.1, 1, Scheme::rslmc).fixed_point - 1.0;
  const double bias2 =
      ou_mean_variance_recursion(0, 1, 1, 0.05, 1, Scheme::rslmc).fixed_point - 1.0;
  CHECK(bias1 / bias2 == doctest::Approx(4.0).epsilon(0.01));
  CHECK(bias1 == doctest::Approx(0.1 * 0.1 / 3.0).epsilon(0.01));

  const double fo1 =
      ou_mean_variance_recursion(0, 1, 1, 0.1, 1, Scheme::lt_drift_first).fixed_point - 1.0;
  const double fo2 =
      ou_mean_variance_recursion(0, 1, 1, 0.05, 1, Scheme::lt_drift_first).fixed_point - 1.0;
  CHECK(fo1 / fo2 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("jacobian along the flow") {
  const TargetModel ou = make_ou(1.0);
  const auto id = jacobian_variational(ou, 1.7, 0.0);
  CHECK(id.point == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(std::exp(id.log_jacobian) == doctest::Approx(1.0).epsilon(1e-12));

  // OU: div b = -lambda, so J(t) = e^{-lambda t} independent of x.
  const auto half = jacobian_variational(ou, 0.8, 0.5);
  CHECK(std::exp(half.log_jacobian) == doctest::Approx(std::exp(-0.5)).epsilon(1e-10));
  CHECK(half.point == doctest::Approx(0.8 * std::exp(-0.5)).epsilon(1e-10));

  // Group property J(-t, phi_t(x)) J(t, x) = 1 on the double-well.
  const TargetModel dw = make_double_well();
  for (double x : {-1.6, -0.3, 0.4, 1.2}) {
    const auto fwd = jacobian_variational(dw, x, 0.25);
    const auto bwd = jacobian_variational(dw, fwd.point, -0.25);
    CHECK(std::exp(fwd.log_jacobian + bwd.log_jacobian) ==
          doctest::Approx(1.0).epsilon(1e-8));
    CHECK(bwd.point == doctest::Approx(x).epsilon(1e-8));
  }
}

TEST_CASE("transport mass conservation") {
  const TargetModel dw = make_double_well();
  auto log_rho0 = [](double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * M_PI); };

  // t = 0: pure quadrature error.
  CHECK(transport_mass_check(dw, log_rho0, -12.0, 12.0, 8193, 0.0) < 1e-10);
  // Double-well at t = 0.25. The transported density is sharply peaked near
  // the wells, so the node spacing (not the node count) controls the
  // quadrature error; [-4, 4] already carries all mass to < 1e-10.
  CHECK(transport_mass_check(dw, log_rho0, -4.0, 4.0, 8193, 0.25) <= 1e-6);

  // OU pushforward is exactly N(0, e^{-2 lambda t}) node-wise.
  const TargetModel ou = make_ou(1.0);
  const double t = 0.7;
  const double var = std::exp(-2.0 * t);
  for (double x : {-2.0, -0.5, 0.0, 1.0, 2.5}) {
    const auto back = jacobian_variational(ou, x, -t);
    const double pushed = std::exp(log_rho0(back.point) + back.log_jacobian);
    const double expect = std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * M_PI * var);
    CHECK(std::fabs(pushed - expect) <= 1e-8);
  }
}

TEST_CASE("eberle f closed form and shape") {
  CHECK(eberle_f(0.0, 4.0, 3.0) == 0.0);
  CHECK(eberle_f(2.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(eberle_f(-1.0, 4.0, 3.0));

  const auto key = rng::seed_key(21);
  const double c_f = 4.0, r1 = 3.0, c1 = std::exp(-c_f * r1);
  for (int i = 0; i < 200; ++i) {
    const double ra = 6.0 * rng::uniform01(key, i, 0, 0);
    const double rb = 6.0 * rng::uniform01(key, i, 0, 1);
    CHECK(eberle_f(ra, c_f, r1) + eberle_f(rb, c_f, r1) >=
          eberle_f(ra + rb, c_f, r1) - 1e-12);
    CHECK(eberle_f(ra, c_f, r1) <= ra + 1e-12);
    CHECK(eberle_f(ra, c_f, r1) >= c1 * ra - 1e-12);
  }
}

TEST_CASE("householder reflection") {
  double z[2] = {0.7, -1.2};
  const double e[2] = {1.0, 0.0};
  reflect(std::span<double>(z, 2), std::span<const double>(e, 2));
  CHECK(z[0] == doctest::Approx(-0.7).epsilon(1e-15));
  CHECK(z[1] == doctest::Approx(-1.2).epsilon(1e-15));
}

TEST_CASE("coupling from identical starts is trivially coupled") {
  const TargetModel dw = make_double_well();
  CouplingParams p;
  p.tau = 0.03125;
  p.n_steps = 20;
  p.x0 = 0.5;
  p.y0 = 0.5;
  const CouplingTrace tr = reflection_coupling_run(dw, p, 256,
                                                   DriftIntegrator::strang_double_well);
  for (double f : tr.mean_f) CHECK(f == 0.0);
  for (double c : tr.frac_coupled) CHECK(c == 1.0);
}

TEST_CASE("double-well coupling contracts") {
  const TargetModel dw = make_double_well();
  CouplingParams p;
  p.tau = 0.03125;
  p.n_steps = 600;
  p.seed = 7;
  const CouplingTrace tr = reflection_coupling_run(dw, p, 20000,
                                                   DriftIntegrator::strang_double_well);
  CHECK(tr.lambda_hat > 0.0);
  // Coupled fraction is non-decreasing.
  for (std::size_t i = 1; i < tr.frac_coupled.size(); ++i)
    CHECK(tr.frac_coupled[i] >= tr.frac_coupled[i - 1]);
  // E f decreases in 20-step window averages after the first few steps.
  double prev = 1e300;
  for (std::size_t w = 10; w + 20 <= 400; w += 20) {
    double avg = 0.0;
    for (std::size_t i = w; i < w + 20; ++i) avg += tr.mean_f[i];
    avg /= 20.0;
    CHECK(avg < prev);
    prev = avg;
  }
  // Rate roughly tau-independent: compare against tau = 2^-4.
  CouplingParams p2 = p;
  p2.tau = 0.0625;
  p2.n_steps = 300;
  const CouplingTrace tr2 = reflection_coupling_run(dw, p2, 20000,
                                                    DriftIntegrator::strang_double_well);
  CHECK(tr2.lambda_hat > 0.0);
  const double ratio = tr.lambda_hat / tr2.lambda_hat;
  CHECK(ratio > 0.5);
  CHECK(ratio < 2.0);
}

TEST_CASE("coupling can use the post-step threshold rule") {
  const TargetModel dw = make_double_well();
  CouplingParams p;
  p.tau = 0.03125;
  p.n_steps = 200;
  p.rule = CoupleRule::threshold;
  const CouplingTrace tr = reflection_coupling_run(dw, p, 2000,
                                                   DriftIntegrator::strang_double_well);
  // Distances still contract even though exact threshold hits are rare.
  CHECK(tr.mean_dist.back() < tr.mean_dist.front());
}
