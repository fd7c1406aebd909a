#include "rsl/diagnostics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsl/density.hpp"
#include "rsl/linfit.hpp"
#include "rsl/pairwise.hpp"
#include "rsl/reference.hpp"
#include "rsl/rng.hpp"

namespace rsl {

namespace {

constexpr double kEscapeRadius = 1e6;

struct AffineMap {
  double a = 1.0, c = 0.0;  // v -> a v + c
  double apply(double v) const { return a * v + c; }
  double fixed_point() const { return c / (1.0 - a); }
};

AffineMap variance_map(double lambda, double beta, double tau, Scheme scheme) {
  const double a = std::exp(-2.0 * lambda * tau);
  const double c = 2.0 * tau / beta;
  switch (scheme) {
    case Scheme::lt_drift_first:
      return {a, c};
    case Scheme::lt_diffusion_first:
      return {a, a * c};
    case Scheme::rslmc:
      // Mean of the two fixed orders; exact for the mean variance since both
      // maps are affine.
      return {a, 0.5 * c * (1.0 + a)};
    case Scheme::lmc_euler: {
      const double g = 1.0 - lambda * tau;
      return {g * g, c};
    }
    case Scheme::strang_symmetric:
      return {a, c * std::exp(-lambda * tau)};
  }
  throw std::logic_error("unreachable");
}

}  // namespace

OuRecursionResult ou_mean_variance_recursion(double v0, double lambda, double beta, double tau,
                                             std::int64_t n, Scheme scheme) {
  const AffineMap m = variance_map(lambda, beta, tau, scheme);
  double v = v0;
  for (std::int64_t i = 0; i < n; ++i) v = m.apply(v);
  return {v, m.fixed_point()};
}

FlowJacobian jacobian_variational(const TargetModel& target, double x, double t,
                                  bool allow_escape) {
  if (target.dim != 1)
    throw std::invalid_argument("jacobian_variational: 1D targets only");
  const int n_sub = 1000;
  const double h = t / n_sub;
  double y = x, lj = 0.0;
  auto b = [&](double v) { return -target.gradient_at(v); };
  auto divb = [&](double v) {
    return target.divergence_of_drift(std::span<const double>(&v, 1));
  };
  for (int i = 0; i < n_sub; ++i) {
    const double k1 = b(y), j1 = divb(y);
    const double y2 = y + 0.5 * h * k1;
    const double k2 = b(y2), j2 = divb(y2);
    const double y3 = y + 0.5 * h * k2;
    const double k3 = b(y3), j3 = divb(y3);
    const double y4 = y + h * k3;
    const double k4 = b(y4), j4 = divb(y4);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    lj += h / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
    if (!std::isfinite(y) || std::fabs(y) > kEscapeRadius) {
      if (allow_escape) return {y, lj, true};
      throw std::runtime_error("jacobian_variational: flow escaped");
    }
  }
  return {y, lj, false};
}

double transport_mass_check(const TargetModel& target,
                            const std::function<double(double)>& log_rho0, double lo, double hi,
                            int n_nodes, double t) {
  if (n_nodes < 3) throw std::invalid_argument("transport_mass_check: too few nodes");
  if (n_nodes % 2 == 0) ++n_nodes;  // Simpson needs an odd node count
  const double dx = (hi - lo) / (n_nodes - 1);
  std::vector<double> vals(n_nodes);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_nodes; ++i) {
    const double x = lo + i * dx;
    const FlowJacobian fj = jacobian_variational(target, x, -t, /*allow_escape=*/true);
    if (fj.escaped) {
      vals[i] = 0.0;
      continue;
    }
    const double lv = log_rho0(fj.point) + fj.log_jacobian;
    vals[i] = lv < -700.0 ? 0.0 : std::exp(lv);
  }
  if (vals.front() > 1e-10 || vals.back() > 1e-10)
    throw std::runtime_error("transport_mass_check: boundary mass violation");
  double mass = 0.0;
  for (int i = 0; i + 2 < n_nodes; i += 2)
    mass += dx / 3.0 * (vals[i] + 4.0 * vals[i + 1] + vals[i + 2]);
  return std::fabs(1.0 - mass);
}

double eberle_f(double r, double c_f, double r1) {
  if (r < 0.0) throw std::invalid_argument("eberle_f: r must be nonnegative");
  if (r <= r1) return (1.0 - std::exp(-c_f * r)) / c_f;
  return (1.0 - std::exp(-c_f * r1)) / c_f + (r - r1) * std::exp(-c_f * r1);
}

void reflect(std::span<double> z, std::span<const double> e) {
  double dot = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) dot += e[k] * z[k];
  for (std::size_t k = 0; k < z.size(); ++k) z[k] -= 2.0 * dot * e[k];
}

namespace {

template <class S>
CouplingTrace coupling_impl(const CouplingParams& p, std::int64_t m, S drift) {
  const double sigma = std::sqrt(2.0 * p.tau / p.beta);
  const double delta = p.couple_threshold > 0.0 ? p.couple_threshold : 1e-6 * sigma;
  const std::uint64_t key = rng::seed_key(p.seed);
  const auto n = p.n_steps;

  constexpr std::int64_t kBlock = 4096;
  const std::int64_t n_blocks = (m + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> bd(n_blocks), bf(n_blocks), bc(n_blocks);

  const int workers = p.n_workers > 0 ? p.n_workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(workers)
  for (std::int64_t blk = 0; blk < n_blocks; ++blk) {
    auto& sd = bd[blk];
    auto& sf = bf[blk];
    auto& sc = bc[blk];
    sd.assign(n + 1, 0.0);
    sf.assign(n + 1, 0.0);
    sc.assign(n + 1, 0.0);
    const std::int64_t p0 = blk * kBlock;
    const std::int64_t p1 = std::min(m, p0 + kBlock);
    for (std::int64_t pair = p0; pair < p1; ++pair) {
      const auto stream = static_cast<std::uint64_t>(pair);
      double x = p.x0, y = p.y0;
      bool coupled = std::fabs(x - y) <= delta;
      if (coupled) y = x;
      auto record = [&](std::int64_t step) {
        const double d = std::fabs(x - y);
        sd[step] += d;
        sf[step] += eberle_f(d, p.c_f, p.r1);
        sc[step] += coupled ? 1.0 : 0.0;
      };
      record(0);
      for (std::int64_t s = 0; s < n; ++s) {
        const auto us = static_cast<std::uint64_t>(s);
        const double coin = rng::uniform01(key, stream, us, 0);
        const double z = sigma * rng::normal(key, stream, us, 2);
        auto kick = [&] {
          const double a = x - y;
          x += z;
          if (coupled) {
            y = x;
            return;
          }
          y -= z;  // 1D reflection: (I - 2ee^T) = -1
          const double b = x - y;
          bool hit = std::fabs(b) <= delta;
          if (!hit && p.rule == CoupleRule::bridge) {
            if (a * b <= 0.0) {
              hit = true;
            } else {
              const double ph = std::exp(-a * b * p.beta / (4.0 * p.tau));
              hit = rng::uniform01(key, stream, us, 30) < ph;
            }
          }
          if (hit) {
            coupled = true;
            y = x;
          }
        };
        if (coin <= 0.5) {
          x = drift(x);
          if (!coupled) y = drift(y); else y = x;
          kick();
        } else {
          kick();
          x = drift(x);
          if (!coupled) y = drift(y); else y = x;
        }
        record(s + 1);
      }
    }
  }

  CouplingTrace trace;
  trace.mean_dist.assign(n + 1, 0.0);
  trace.mean_f.assign(n + 1, 0.0);
  trace.frac_coupled.assign(n + 1, 0.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::int64_t blk = 0; blk < n_blocks; ++blk)
    for (std::int64_t s = 0; s <= n; ++s) {
      trace.mean_dist[s] += bd[blk][s] * inv_m;
      trace.mean_f[s] += bf[blk][s] * inv_m;
      trace.frac_coupled[s] += bc[blk][s] * inv_m;
    }

  // Contraction rate fit on the pre-plateau window of log E f(|Z_n|).
  double plateau = 0.0;
  const std::int64_t tail_begin = n - std::max<std::int64_t>(1, n / 10);
  for (std::int64_t s = tail_begin; s <= n; ++s) plateau += trace.mean_f[s];
  plateau /= static_cast<double>(n + 1 - tail_begin);
  const double cutoff = 10.0 * plateau;
  std::int64_t end = 1;
  while (end <= n && trace.mean_f[end] > cutoff && trace.mean_f[end] > 0.0) ++end;
  if (end - 0 >= 4) {
    std::vector<double> ts, ls;
    for (std::int64_t s = 0; s < end; ++s) {
      ts.push_back(static_cast<double>(s) * p.tau);
      ls.push_back(std::log(trace.mean_f[s]));
    }
    const OlsFit fit = ols_fit(ts, ls);
    trace.lambda_hat = -fit.slope;
    trace.lambda_half_width = 2.0 * fit.slope_stderr;
    trace.fit_begin = 0;
    trace.fit_end = end;
  }
  return trace;
}

}  // namespace

CouplingTrace reflection_coupling_run(const TargetModel& target, const CouplingParams& params,
                                      std::int64_t m_pairs, DriftIntegrator integrator) {
  if (target.dim != 1)
    throw std::invalid_argument("reflection_coupling_run: 1D targets only");
  if (m_pairs < 1) throw std::invalid_argument("reflection_coupling_run: need pairs");
  switch (integrator) {
    case DriftIntegrator::exact_flow: {
      if (target.ou_lambda > 0.0) {
        const double decay = std::exp(-target.ou_lambda * params.tau);
        return coupling_impl(params, m_pairs, [decay](double x) { return decay * x; });
      }
      const auto& flow = target.drift_flow;
      const double tau = params.tau;
      return coupling_impl(params, m_pairs, [&flow, tau](double x) {
        flow(std::span<double>(&x, 1), tau);
        return x;
      });
    }
    case DriftIntegrator::strang_double_well: {
      const double c = 4.0 * params.tau;
      const double e = std::exp(4.0 * params.tau);
      return coupling_impl(params, m_pairs, [c, e](double x) {
        double v = x / std::sqrt(1.0 + c * x * x);
        v *= e;
        return v / std::sqrt(1.0 + c * v * v);
      });
    }
    case DriftIntegrator::heun: {
      const TargetModel* t = &target;
      const double h = params.tau;
      return coupling_impl(params, m_pairs, [t, h](double x) {
        const double f1 = -t->gradient_at(x);
        const double f2 = -t->gradient_at(x + h * f1);
        return x + 0.5 * h * (f1 + f2);
      });
    }
  }
  throw std::logic_error("unreachable");
}

BiasSweepReport invariant_bias_sweep(const TargetModel& target, Scheme scheme,
                                     const std::vector<double>& taus,
                                     const BiasSweepConfig& cfg) {
  if (target.dim != 1)
    throw std::invalid_argument("invariant_bias_sweep: 1D targets only");
  BiasSweepReport report;
  const bool exact_cdf = target.recipe == ReferenceRecipe::gaussian_exact;

  for (std::size_t ti = 0; ti < taus.size(); ++ti) {
    const double tau = taus[ti];
    const auto n_steps = static_cast<std::int64_t>(std::ceil(cfg.t_final / tau));
    const std::int64_t burn = n_steps / 2;
    std::vector<double> w1s;
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      SamplerConfig sc;
      sc.tau = tau;
      sc.beta = cfg.beta;
      sc.n_steps = n_steps;
      sc.seed = cfg.seed + 104729ULL * ti + 7919ULL * static_cast<std::uint64_t>(rep) + 1;
      sc.scheme = scheme;
      sc.drift_integrator = default_integrator(target);
      sc.n_particles = cfg.n_particles;
      sc.n_workers = cfg.n_workers;
      InitSpec init;  // point mass at the origin

      if (exact_cdf) {
        // Pool every post-burn-in step into a fine histogram and integrate
        // |F_hat - F*| against the exact stationary CDF.
        constexpr int kBins = 1 << 20;
        const double lo = -8.0, hi = 8.0;
        const double inv_w = kBins / (hi - lo);
        std::vector<double> counts(kBins, 0.0);
        double total = 0.0;
        run_ensemble(sc, target, init, [&](const EnsembleState& st) {
          if (st.step_index <= burn) return;
          for (double v : st.positions) {
            auto b = static_cast<std::int64_t>((v - lo) * inv_w);
            b = std::clamp<std::int64_t>(b, 0, kBins - 1);
            counts[b] += 1.0;
          }
          total += static_cast<double>(st.positions.size());
        });
        const double sstar = 1.0 / std::sqrt(cfg.beta * target.ou_lambda);
        double cum = 0.0, w1 = 0.0;
        const double binw = (hi - lo) / kBins;
        for (int b = 0; b < kBins; ++b) {
          cum += counts[b] / total;
          const double edge = lo + binw * (b + 1);
          const double fstar = 0.5 * std::erfc(-edge / (sstar * std::sqrt(2.0)));
          w1 += std::fabs(cum - fstar) * binw;
        }
        w1s.push_back(w1);
      } else {
        constexpr std::int64_t kPoolCap = 20000000;
        const std::int64_t post = n_steps - burn;
        const std::int64_t stride =
            std::max<std::int64_t>(1, post * cfg.n_particles / kPoolCap);
        std::vector<double> pool;
        run_ensemble(sc, target, init, [&](const EnsembleState& st) {
          if (st.step_index <= burn) return;
          if ((st.step_index - burn) % stride != 0) return;
          pool.insert(pool.end(), st.positions.begin(), st.positions.end());
        });
        const auto ref = draw_reference(target, static_cast<std::int64_t>(pool.size()),
                                        sc.seed + 0xabcdULL, cfg.beta);
        w1s.push_back(w1_sorted_1d(pool, ref.samples));
      }
    }
    double mean = 0.0;
    for (double w : w1s) mean += w;
    mean /= static_cast<double>(w1s.size());
    double se = 0.0;
    if (w1s.size() > 1) {
      double ss = 0.0;
      for (double w : w1s) ss += (w - mean) * (w - mean);
      se = std::sqrt(ss / static_cast<double>(w1s.size() - 1) /
                     static_cast<double>(w1s.size()));
    }
    report.rows.push_back({tau, mean, se});
  }

  if (report.rows.size() >= 3) {
    std::vector<double> lx, ly;
    for (const auto& r : report.rows)
      if (r.w1 > 0.0) {
        lx.push_back(std::log(r.tau));
        ly.push_back(std::log(r.w1));
      }
    if (lx.size() >= 3) {
      const OlsFit fit = ols_fit(lx, ly);
      report.slope = fit.slope;
      report.intercept = fit.intercept;
      report.residual = fit.residual;
    }
  }
  return report;
}

}  // namespace rsl
