#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rsl/samplers.hpp"
#include "rsl/targets.hpp"

namespace rsl {

// --- Exact OU law propagation -------------------------------------------

struct OuRecursionResult {
  double variance;     // mean variance after n steps
  double fixed_point;  // stationary mean variance of the scheme
};

// Iterates the per-scheme affine variance map for U = (lambda/2) x^2. The
// rslmc update is the arithmetic mean of the two fixed orders, which is exact
// for the mean variance because both maps are affine.
OuRecursionResult ou_mean_variance_recursion(double v0, double lambda, double beta, double tau,
                                             std::int64_t n, Scheme scheme);

// --- Drift-flow semigroup checks ------------------------------------------

struct FlowJacobian {
  double point;        // phi_t(x)
  double log_jacobian; // log J(t, x)
  bool escaped = false;
};

// Co-integrates xdot = b(x) and d(log J)/dt = div b along the flow with RK4 at
// substep t/1000 (1D targets). Throws on non-finite flow unless allow_escape.
FlowJacobian jacobian_variational(const TargetModel& target, double x, double t,
                                  bool allow_escape = false);

// Evaluates rho0(phi_{-t}(x)) J(-t,x) on a uniform grid and returns |1 - mass|
// by Simpson quadrature. log_rho0 is the log initial density.
double transport_mass_check(const TargetModel& target,
                            const std::function<double(double)>& log_rho0, double lo, double hi,
                            int n_nodes, double t);

// --- Reflection coupling ---------------------------------------------------

// f(r) = integral_0^r exp(-c_f (s ^ R1)) ds, closed form.
double eberle_f(double r, double c_f, double r1);

enum class CoupleRule {
  bridge,     // Brownian-bridge zero-crossing of the difference in the kick
  threshold,  // |X - Y| <= delta_c after the step
};

struct CouplingParams {
  double c_f = 4.0;
  double r1 = 3.0;
  double couple_threshold = 0.0;  // 0 = default 1e-6 * sqrt(2 tau / beta)
  double tau = 0.03125;
  double beta = 1.0;
  std::int64_t n_steps = 1000;
  std::uint64_t seed = 0;
  CoupleRule rule = CoupleRule::bridge;
  double x0 = -1.0;
  double y0 = 1.0;
  int n_workers = 0;
};

struct CouplingTrace {
  std::vector<double> mean_dist;     // E|Z_n|
  std::vector<double> mean_f;        // E f(|Z_n|)
  std::vector<double> frac_coupled;  // fraction of coupled pairs
  double lambda_hat = 0.0;           // contraction rate per unit time
  double lambda_half_width = 0.0;    // 2 x standard error of the fit
  std::int64_t fit_begin = 0;
  std::int64_t fit_end = 0;  // exclusive
};

// Householder reflection (I - 2 e e^T) z for a unit vector e.
void reflect(std::span<double> z, std::span<const double> e);

// Paired chains sharing the order coin, reflected diffusion kicks; 1D targets.
CouplingTrace reflection_coupling_run(const TargetModel& target, const CouplingParams& params,
                                      std::int64_t m_pairs,
                                      DriftIntegrator integrator = DriftIntegrator::heun);

// --- Invariant-measure bias -------------------------------------------------

struct BiasRow {
  double tau = 0.0;
  double w1 = 0.0;
  double w1_stderr = 0.0;
};

struct BiasSweepReport {
  std::vector<BiasRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

struct BiasSweepConfig {
  std::int64_t n_particles = 100000;
  double t_final = 20.0;
  double beta = 1.0;
  std::uint64_t seed = 0;
  int replicates = 3;
  int n_workers = 0;
};

// Long-run stationary W1 bias versus tau: the first half of each run is
// discarded, the rest pooled. For the OU target the pooled empirical CDF is
// compared against the exact Gaussian CDF; otherwise pooled snapshots are
// paired against a reference sample set.
BiasSweepReport invariant_bias_sweep(const TargetModel& target, Scheme scheme,
                                     const std::vector<double>& taus,
                                     const BiasSweepConfig& cfg);

}  // namespace rsl
