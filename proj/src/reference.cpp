#include "rsl/reference.hpp"

#include <cmath>
#include <stdexcept>

#include "rsl/rng.hpp"

namespace rsl {

namespace {

constexpr double kUniformGuard = 0x1p-53;

double log_2cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

// log of the Gaussian proposal density.
double log_proposal(const GaussianProposal& g, double x) {
  const double d = (x - g.mean) / g.stddev;
  return -0.5 * d * d - std::log(g.stddev) - 0.5 * std::log(2.0 * M_PI);
}

// Envelope log-constant certified on a wide grid, with a 10% safety margin.
double certify_envelope(const TargetModel& target, const GaussianProposal& proposal,
                        double beta, double lo, double hi, int n_points) {
  double best = -1e308;
  const double dx = (hi - lo) / (n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    const double x = lo + i * dx;
    const double lr = -beta * target.potential_at(x) - log_proposal(proposal, x);
    if (lr > best) best = lr;
  }
  return best + std::log(1.1);
}

}  // namespace

ReferenceSampleSet sample_logistic_inverse_cdf(std::int64_t m, std::uint64_t seed) {
  if (m < 0) throw std::invalid_argument("sample count must be nonnegative");
  ReferenceSampleSet out;
  out.dim = 1;
  out.target_name = "logistic";
  out.method = "inverse-cdf";
  out.seed = seed;
  out.samples.resize(m);
  const std::uint64_t key = rng::seed_key(seed);
  for (std::int64_t i = 0; i < m; ++i) {
    double u = rng::uniform01(key, static_cast<std::uint64_t>(i), 0, 0);
    u = std::min(std::max(u, kUniformGuard), 1.0 - kUniformGuard);
    out.samples[i] = std::log(u / (1.0 - u));
  }
  return out;
}

ReferenceSampleSet rejection_sample(const TargetModel& target, const GaussianProposal& proposal,
                                    std::int64_t m, std::uint64_t seed, double beta) {
  if (target.dim != 1) throw std::invalid_argument("rejection_sample: 1D targets only");
  ReferenceSampleSet out;
  out.dim = 1;
  out.target_name = target.name;
  out.method = "rejection";
  out.seed = seed;
  out.samples.resize(m);

  // The quadratic-logcosh acceptance simplifies exactly when the proposal
  // matches the quadratic part: ratio = (cosh x)^{-beta eps}.
  const bool analytic =
      target.quad_lambda > 0.0 && proposal.mean == 0.0 &&
      std::fabs(proposal.stddev - 1.0 / std::sqrt(beta * target.quad_lambda)) < 1e-12;
  double log_k = 0.0;
  if (!analytic) log_k = certify_envelope(target, proposal, beta, -8.0, 8.0, 100000);

  const std::uint64_t key = rng::seed_key(seed);
  std::int64_t attempts_total = 0;
  for (std::int64_t i = 0; i < m; ++i) {
    const auto stream = static_cast<std::uint64_t>(i);
    for (std::uint64_t a = 0;; ++a) {
      const std::uint64_t base = a * 40;
      if (base + 40 > rng::kMaxSlot)
        throw std::runtime_error("rejection_sample: attempt budget exhausted");
      ++attempts_total;
      const double x = proposal.mean + proposal.stddev * rng::normal(key, stream, 0, base);
      double log_ratio;
      if (analytic) {
        log_ratio = -beta * target.quad_epsilon * (log_2cosh(x) - std::log(2.0));
      } else {
        log_ratio = -beta * target.potential_at(x) - log_proposal(proposal, x) - log_k;
        if (log_ratio > 0.0)
          throw std::runtime_error("rejection_sample: envelope violated at x = " +
                                   std::to_string(x));
      }
      const double u = rng::uniform01(key, stream, 0, base + 36);
      if (std::log(u) <= log_ratio) {
        out.samples[i] = x;
        break;
      }
    }
  }
  out.acceptance_rate = static_cast<double>(m) / static_cast<double>(attempts_total);
  return out;
}

ReferenceSampleSet sample_mixture_2d(const MixtureSpec& spec, std::int64_t m,
                                     std::uint64_t seed) {
  if (spec.chol.empty())
    throw std::invalid_argument("sample_mixture_2d: spec not validated");
  ReferenceSampleSet out;
  out.dim = 2;
  out.target_name = "mog2d";
  out.method = "mixture-direct";
  out.seed = seed;
  out.samples.resize(2 * m);
  const std::uint64_t key = rng::seed_key(seed);
  for (std::int64_t i = 0; i < m; ++i) {
    const auto stream = static_cast<std::uint64_t>(i);
    const double u = rng::uniform01(key, stream, 0, 0);
    std::size_t k = 0;
    double acc = spec.weights[0];
    while (u > acc && k + 1 < spec.weights.size()) acc += spec.weights[++k];
    const double z0 = rng::normal(key, stream, 0, 2);
    const double z1 = rng::normal(key, stream, 0, 34);
    const auto& l = spec.chol[k];
    out.samples[2 * i] = spec.means[k][0] + l[0] * z0;
    out.samples[2 * i + 1] = spec.means[k][1] + l[1] * z0 + l[2] * z1;
  }
  return out;
}

ReferenceSampleSet sample_ou_exact(double lambda, double beta, std::int64_t m,
                                   std::uint64_t seed) {
  if (lambda <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("sample_ou_exact: lambda and beta must be positive");
  ReferenceSampleSet out;
  out.dim = 1;
  out.target_name = "ou";
  out.method = "gaussian-exact";
  out.seed = seed;
  out.samples.resize(m);
  const double s = 1.0 / std::sqrt(beta * lambda);
  const std::uint64_t key = rng::seed_key(seed);
  for (std::int64_t i = 0; i < m; ++i)
    out.samples[i] = s * rng::normal(key, static_cast<std::uint64_t>(i), 0, 2);
  return out;
}

ReferenceSampleSet draw_reference(const TargetModel& target, std::int64_t m, std::uint64_t seed,
                                  double beta) {
  switch (target.recipe) {
    case ReferenceRecipe::inverse_cdf:
      return sample_logistic_inverse_cdf(m, seed);
    case ReferenceRecipe::rejection: {
      GaussianProposal prop;
      if (target.quad_lambda > 0.0) {
        prop.stddev = 1.0 / std::sqrt(beta * target.quad_lambda);
      } else {
        prop.stddev = 0.8;  // covers both wells of the double-well at +-1
      }
      return rejection_sample(target, prop, m, seed, beta);
    }
    case ReferenceRecipe::mixture_direct:
      return sample_mixture_2d(*target.mixture, m, seed);
    case ReferenceRecipe::gaussian_exact:
      return sample_ou_exact(target.ou_lambda, beta, m, seed);
  }
  throw std::logic_error("unreachable");
}

}  // namespace rsl
