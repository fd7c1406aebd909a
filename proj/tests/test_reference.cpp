#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rsl/reference.hpp"
#include "rsl/targets.hpp"

using namespace rsl;

namespace {

// Two-sided quantile comparison against an analytic CDF: the max deviation
// between the empirical CDF at the order statistics and the analytic CDF.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

double normal_cdf(double x, double mu, double s) {
  return 0.5 * std::erfc(-(x - mu) / (s * std::sqrt(2.0)));
}

}  // namespace

TEST_CASE("logistic inverse-cdf transform and moments") {
  // Closed-form quantiles.
  CHECK(std::log(0.5 / 0.5) == 0.0);
  CHECK(std::log(0.9 / 0.1) == doctest::Approx(2.19722).epsilon(1e-5));

  const auto set = sample_logistic_inverse_cdf(1000000, 11);
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  for (double x : set.samples) {
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double n = static_cast<double>(set.samples.size());
  const double var = s2 / n - (s / n) * (s / n);
  const double target_var = M_PI * M_PI / 3.0;
  // SE of the sample variance from the fourth moment.
  const double se = std::sqrt((s4 / n - var * var) / n);
  CHECK(std::fabs(var - target_var) < 3.0 * se);
  for (double x : set.samples) CHECK(std::isfinite(x));
}

TEST_CASE("logistic sampler passes the quantile comparison check") {
  const auto set = sample_logistic_inverse_cdf(100000, 17);
  const double d = ks_statistic(set.samples, [](double x) {
    return 1.0 / (1.0 + std::exp(-x));
  });
  CHECK(d < 2.0 / std::sqrt(100000.0) * 1.95);
}

TEST_CASE("logcosh rejection: analytic ratio and histogram fit") {
  const TargetModel t = make_quadratic_logcosh(1.0, 0.8);
  // Acceptance probability at x=0 is (cosh 0)^{-beta eps} = 1.
  CHECK(std::pow(std::cosh(0.0), -0.8) == 1.0);

  const auto set = draw_reference(t, 1000000, 23, 1.0);
  CHECK(set.method == "rejection");
  CHECK(set.acceptance_rate > 0.0);
  CHECK(set.acceptance_rate <= 1.0);

  // chi^2 per bin against the quadrature-normalized density on 512 bins.
  const double lo = -4.0, hi = 4.0;
  const int bins = 512;
  const double w = (hi - lo) / bins;
  std::vector<double> expect(bins);
  double zconst = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double x = lo + (b + 0.5) * w;
    expect[b] = std::exp(-t.potential_at(x));
    zconst += expect[b] * w;
  }
  // Tail mass outside [-4,4] is ~1e-8 for this target; ignore it.
  std::vector<double> counts(bins, 0.0);
  std::int64_t inside = 0;
  for (double x : set.samples) {
    const int b = static_cast<int>((x - lo) / w);
    if (b >= 0 && b < bins) {
      counts[b] += 1.0;
      ++inside;
    }
  }
  double chi2 = 0.0;
  int used = 0;
  for (int b = 0; b < bins; ++b) {
    const double e = expect[b] * w / zconst * static_cast<double>(inside);
    if (e < 5.0) continue;
    chi2 += (counts[b] - e) * (counts[b] - e) / e;
    ++used;
  }
  CHECK(chi2 / used <= 2.0);
}

TEST_CASE("logcosh rejection matches the gaussian-weighted quantile check") {
  const TargetModel t = make_quadratic_logcosh(1.0, 0.8);
  const auto set = draw_reference(t, 100000, 29, 1.0);
  // Build the analytic CDF by dense quadrature.
  const int n = 20000;
  const double lo = -8.0, hi = 8.0, w = (hi - lo) / n;
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const double x = lo + (i + 0.5) * w;
    cum[i + 1] = cum[i] + std::exp(-t.potential_at(x)) * w;
  }
  const double z = cum[n];
  const double d = ks_statistic(set.samples, [&](double x) {
    const double pos = std::clamp((x - lo) / w, 0.0, static_cast<double>(n));
    const auto i = static_cast<int>(pos);
    const double frac = pos - i;
    const double c = i < n ? cum[i] * (1.0 - frac) + cum[i + 1] * frac : cum[n];
    return c / z;
  });
  CHECK(d < 2.0 / std::sqrt(100000.0) * 1.95);
}

TEST_CASE("double-well rejection with certified envelope") {
  const TargetModel t = make_double_well();
  const auto set = draw_reference(t, 200000, 37, 1.0);
  CHECK(set.acceptance_rate > 0.2);
  CHECK(set.acceptance_rate < 1.0);
  // Reproducible acceptance rate under the same seed.
  const auto again = draw_reference(t, 200000, 37, 1.0);
  CHECK(set.acceptance_rate == again.acceptance_rate);
  CHECK(set.samples == again.samples);
  // Bimodal symmetry: mean near zero, mass concentrated around +-1.
  double s = 0.0;
  for (double x : set.samples) s += x;
  CHECK(std::fabs(s / 200000.0) < 0.02);
}

TEST_CASE("2d mixture sampler: forced component and global mean") {
  // Weights {1, 0} force component 1: with z=0 the draw would be exactly mu1;
  // empirically the component-1 covariance must match Sigma1.
  MixtureSpec one;
  one.weights = {1.0, 0.0};
  one.means = {{-2.0, 0.0}, {2.0, 0.0}};
  one.covariances = {{0.6, 0.2, 0.2, 0.5}, {0.5, -0.1, -0.1, 0.7}};
  one.validate();
  const auto c1 = sample_mixture_2d(one, 1000000, 41);
  const double n = 1000000.0;
  double m0 = 0.0, m1 = 0.0;
  for (std::int64_t i = 0; i < 1000000; ++i) {
    m0 += c1.samples[2 * i];
    m1 += c1.samples[2 * i + 1];
  }
  m0 /= n;
  m1 /= n;
  CHECK(std::fabs(m0 + 2.0) < 3.0 * std::sqrt(0.6 / n));
  CHECK(std::fabs(m1) < 3.0 * std::sqrt(0.5 / n));
  double c00 = 0.0, c01 = 0.0, c11 = 0.0;
  for (std::int64_t i = 0; i < 1000000; ++i) {
    const double a = c1.samples[2 * i] - m0, b = c1.samples[2 * i + 1] - m1;
    c00 += a * a;
    c01 += a * b;
    c11 += b * b;
  }
  CHECK(c00 / n == doctest::Approx(0.6).epsilon(0.01));
  CHECK(c01 / n == doctest::Approx(0.2).epsilon(0.03));
  CHECK(c11 / n == doctest::Approx(0.5).epsilon(0.01));

  // Even weights: global mean is (0,0) by symmetry.
  const TargetModel t = make_mixture_2d();
  const auto set = draw_reference(t, 1000000, 43, 1.0);
  double g0 = 0.0, g1 = 0.0;
  for (std::int64_t i = 0; i < 1000000; ++i) {
    g0 += set.samples[2 * i];
    g1 += set.samples[2 * i + 1];
  }
  // Per-axis variance ~ 0.55 + 4 (mean separation) for x, ~0.6 for y.
  CHECK(std::fabs(g0 / n) < 3.0 * std::sqrt(4.6 / n));
  CHECK(std::fabs(g1 / n) < 3.0 * std::sqrt(0.7 / n));
}

TEST_CASE("ou exact sampler") {
  const auto empty = sample_ou_exact(1.0, 1.0, 0, 3);
  CHECK(empty.samples.empty());

  const auto quarter = sample_ou_exact(4.0, 1.0, 1000000, 51);
  double s2 = 0.0;
  for (double x : quarter.samples) s2 += x * x;
  const double var = s2 / 1000000.0;
  CHECK(std::fabs(var - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / 1000000.0));

  const auto std1 = sample_ou_exact(1.0, 1.0, 1000000, 53);
  double m2 = 0.0, m4 = 0.0;
  for (double x : std1.samples) {
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m2 /= 1000000.0;
  m4 /= 1000000.0;
  const double kurt = m4 / (m2 * m2) - 3.0;
  CHECK(std::fabs(kurt) < 4.0 * std::sqrt(96.0 / 1000000.0));

  const double d = ks_statistic(std1.samples,
                                [](double x) { return normal_cdf(x, 0.0, 1.0); });
  CHECK(d < 2.0 / std::sqrt(1000000.0) * 1.95 * 3.0);  // large-m slack
}
