#include "rsl/samplers.hpp"

#include <omp.h>

#include <cmath>

#include "rsl/rng.hpp"

namespace rsl {

namespace {

// Slot layout within one (particle, step) counter block: slot 0 is the order
// coin, normal component k draws from slots [2 + 32k, 2 + 32(k+1)).
constexpr std::uint64_t kCoinSlot = 0;
constexpr std::uint64_t kNormalBase = 2;
constexpr std::uint64_t kNormalStride = 32;
constexpr std::uint64_t kInitStep = rng::kMaxStep;  // reserved counter block

enum class Order { random, drift_first, diffusion_first, strang };

struct OuFlow {
  double decay;
  void operator()(double* x, int /*dim*/) const { x[0] *= decay; }
};

struct ExactFlow {
  const TargetModel* target;
  double h;
  void operator()(double* x, int dim) const {
    target->drift_flow(std::span<double>(x, dim), h);
  }
};

struct StrangDw {
  double c;  // 4h, the coefficient of the half-step cubic subflow
  double e;  // exp(4h)
  void operator()(double* x, int /*dim*/) const {
    double v = x[0];
    v = v / std::sqrt(1.0 + c * v * v);
    v = v * e;
    v = v / std::sqrt(1.0 + c * v * v);
    x[0] = v;
  }
};

struct HeunDrift {
  const TargetModel* target;
  double h;
  void operator()(double* x, int dim) const {
    double g[2], y[2], g2[2];
    target->gradient(std::span<const double>(x, dim), std::span<double>(g, dim));
    for (int k = 0; k < dim; ++k) y[k] = x[k] - h * g[k];
    target->gradient(std::span<const double>(y, dim), std::span<double>(g2, dim));
    for (int k = 0; k < dim; ++k) x[k] -= 0.5 * h * (g[k] + g2[k]);
  }
};

struct EulerDrift {
  const TargetModel* target;
  double h;
  void operator()(double* x, int dim) const {
    double g[2];
    target->gradient(std::span<const double>(x, dim), std::span<double>(g, dim));
    for (int k = 0; k < dim; ++k) x[k] -= h * g[k];
  }
};

int resolve_workers(int n_workers) {
  return n_workers > 0 ? n_workers : omp_get_max_threads();
}

template <class S>
void step_kernel(double* pos, int dim, std::int64_t m, std::uint64_t key,
                 std::int64_t step, Order order, double sigma, bool shared_coin,
                 S drift, int workers) {
  const auto ustep = static_cast<std::uint64_t>(step);
  const auto& zig = rng::Ziggurat::instance();
#pragma omp parallel for schedule(static) num_threads(workers)
  for (std::int64_t p = 0; p < m; ++p) {
    const auto up = static_cast<std::uint64_t>(p);
    double x[2];
    for (int k = 0; k < dim; ++k) x[k] = pos[p * dim + k];
    double z[2];
    for (int k = 0; k < dim; ++k)
      z[k] = sigma * zig.draw(key, up, ustep,
                              kNormalBase + kNormalStride * static_cast<std::uint64_t>(k));
    switch (order) {
      case Order::random: {
        const std::uint64_t coin_stream = shared_coin ? rng::kSharedStream : up;
        const double zeta = rng::uniform01(key, coin_stream, ustep, kCoinSlot);
        if (zeta <= 0.5) {
          drift(x, dim);
          for (int k = 0; k < dim; ++k) x[k] += z[k];
        } else {
          for (int k = 0; k < dim; ++k) x[k] += z[k];
          drift(x, dim);
        }
        break;
      }
      case Order::drift_first:
        drift(x, dim);
        for (int k = 0; k < dim; ++k) x[k] += z[k];
        break;
      case Order::diffusion_first:
        for (int k = 0; k < dim; ++k) x[k] += z[k];
        drift(x, dim);
        break;
      case Order::strang:
        drift(x, dim);  // drift carries the half step
        for (int k = 0; k < dim; ++k) x[k] += z[k];
        drift(x, dim);
        break;
    }
    for (int k = 0; k < dim; ++k) pos[p * dim + k] = x[k];
  }
}

template <class S>
void dispatch_order(EnsembleState& state, const SamplerConfig& cfg, S drift) {
  Order order;
  switch (cfg.scheme) {
    case Scheme::rslmc: order = Order::random; break;
    case Scheme::lmc_euler: order = Order::drift_first; break;
    case Scheme::lt_drift_first: order = Order::drift_first; break;
    case Scheme::lt_diffusion_first: order = Order::diffusion_first; break;
    case Scheme::strang_symmetric: order = Order::strang; break;
    default: throw std::logic_error("unreachable");
  }
  const double sigma = std::sqrt(2.0 * cfg.tau / cfg.beta);
  const std::uint64_t key = rng::seed_key(state.seed);
  step_kernel(state.positions.data(), state.dim, state.n_particles, key,
              state.step_index, order, sigma, cfg.shared_coin, drift,
              resolve_workers(cfg.n_workers));
}

void check_finite(const EnsembleState& state) {
  for (std::int64_t p = 0; p < state.n_particles; ++p)
    for (int k = 0; k < state.dim; ++k)
      if (!std::isfinite(state.positions[p * state.dim + k]))
        throw DivergenceError(p, state.step_index);
}

}  // namespace

Scheme scheme_from_name(const std::string& s) {
  if (s == "rslmc") return Scheme::rslmc;
  if (s == "lmc-euler") return Scheme::lmc_euler;
  if (s == "lie-trotter-drift-first") return Scheme::lt_drift_first;
  if (s == "lie-trotter-diffusion-first") return Scheme::lt_diffusion_first;
  if (s == "strang-symmetric") return Scheme::strang_symmetric;
  throw std::invalid_argument("unknown scheme: " + s);
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::rslmc: return "rslmc";
    case Scheme::lmc_euler: return "lmc-euler";
    case Scheme::lt_drift_first: return "lie-trotter-drift-first";
    case Scheme::lt_diffusion_first: return "lie-trotter-diffusion-first";
    case Scheme::strang_symmetric: return "strang-symmetric";
  }
  return "?";
}

DriftIntegrator integrator_from_name(const std::string& s) {
  if (s == "heun") return DriftIntegrator::heun;
  if (s == "strang-double-well") return DriftIntegrator::strang_double_well;
  if (s == "exact-flow") return DriftIntegrator::exact_flow;
  throw std::invalid_argument("unknown drift integrator: " + s);
}

DriftIntegrator default_integrator(const TargetModel& target) {
  if (target.ou_lambda > 0.0) return DriftIntegrator::exact_flow;
  if (target.name == "double-well") return DriftIntegrator::strang_double_well;
  return DriftIntegrator::heun;
}

void SamplerConfig::validate(const TargetModel& target) const {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
  if (n_steps < 0) throw std::invalid_argument("n_steps must be nonnegative");
  if (n_particles < 1) throw std::invalid_argument("n_particles must be positive");
  if (static_cast<std::uint64_t>(n_particles) > rng::kMaxStream)
    throw std::invalid_argument("n_particles exceeds stream space");
  if (static_cast<std::uint64_t>(n_steps) >= kInitStep)
    throw std::invalid_argument("n_steps exceeds counter space");
  if (drift_integrator == DriftIntegrator::exact_flow && !target.has_drift_flow())
    throw std::invalid_argument("exact-flow requires a target with a drift flow");
  if (drift_integrator == DriftIntegrator::strang_double_well &&
      target.name != "double-well")
    throw std::invalid_argument("strang-double-well is specific to the double-well target");
  if (target.dim > 2) throw std::invalid_argument("dim > 2 not supported");
}

void heun_step(std::span<double> x, double h,
               const std::function<void(std::span<const double>, std::span<double>)>& drift) {
  if (h <= 0.0) throw std::invalid_argument("heun_step: h must be positive");
  const int d = static_cast<int>(x.size());
  std::vector<double> f1(d), y(d), f2(d);
  drift(x, f1);
  for (int k = 0; k < d; ++k) y[k] = x[k] + h * f1[k];
  drift(y, f2);
  for (int k = 0; k < d; ++k) x[k] += 0.5 * h * (f1[k] + f2[k]);
}

double strang_dw_step(double x, double h) {
  const double c = 4.0 * h;
  double v = x / std::sqrt(1.0 + c * x * x);
  v *= std::exp(4.0 * h);
  return v / std::sqrt(1.0 + c * v * v);
}

void diffusion_kick(std::span<double> x, double tau, double beta, std::span<const double> z) {
  const double s = std::sqrt(2.0 * tau / beta);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] += s * z[k];
}

void advance_step(EnsembleState& state, const SamplerConfig& cfg, const TargetModel& target) {
  const double h = cfg.scheme == Scheme::strang_symmetric ? 0.5 * cfg.tau : cfg.tau;
  if (cfg.scheme == Scheme::lmc_euler) {
    dispatch_order(state, cfg, EulerDrift{&target, cfg.tau});
  } else {
    switch (cfg.drift_integrator) {
      case DriftIntegrator::exact_flow:
        if (target.ou_lambda > 0.0)
          dispatch_order(state, cfg, OuFlow{std::exp(-target.ou_lambda * h)});
        else
          dispatch_order(state, cfg, ExactFlow{&target, h});
        break;
      case DriftIntegrator::strang_double_well:
        dispatch_order(state, cfg, StrangDw{4.0 * h, std::exp(4.0 * h)});
        break;
      case DriftIntegrator::heun:
        dispatch_order(state, cfg, HeunDrift{&target, h});
        break;
    }
  }
  ++state.step_index;
}

EnsembleState run_ensemble(const SamplerConfig& cfg, const TargetModel& target,
                           const InitSpec& init,
                           const std::function<void(const EnsembleState&)>& on_step) {
  cfg.validate(target);
  EnsembleState state;
  state.dim = target.dim;
  state.n_particles = cfg.n_particles;
  state.seed = cfg.seed;
  state.positions.assign(cfg.n_particles * target.dim, 0.0);

  const std::uint64_t key = rng::seed_key(cfg.seed);
  switch (init.kind) {
    case InitSpec::Kind::point: {
      std::vector<double> x0(target.dim, 0.0);
      for (std::size_t k = 0; k < init.x0.size() && k < x0.size(); ++k) x0[k] = init.x0[k];
      for (std::int64_t p = 0; p < cfg.n_particles; ++p)
        for (int k = 0; k < target.dim; ++k) state.positions[p * target.dim + k] = x0[k];
      break;
    }
    case InitSpec::Kind::standard_normal:
      for (std::int64_t p = 0; p < cfg.n_particles; ++p)
        for (int k = 0; k < target.dim; ++k)
          state.positions[p * target.dim + k] =
              rng::normal(key, static_cast<std::uint64_t>(p), kInitStep,
                          kNormalBase + kNormalStride * static_cast<std::uint64_t>(k));
      break;
    case InitSpec::Kind::custom:
      if (init.custom.size() != state.positions.size())
        throw std::invalid_argument("custom init size mismatch");
      state.positions = init.custom;
      break;
  }

  for (std::int64_t n = 0; n < cfg.n_steps; ++n) {
    advance_step(state, cfg, target);
    // Divergence in these dynamics is monotone once started; a sparse check
    // suffices and keeps the hot loop clean.
    if (state.step_index % 64 == 0 || state.step_index == cfg.n_steps) check_finite(state);
    if (on_step) on_step(state);
  }
  if (cfg.n_steps > 0) check_finite(state);
  return state;
}

}  // namespace rsl
