#include "rsl/serial_reference.hpp"

#include <cmath>
#include <vector>

#include "rsl/rng.hpp"

namespace rsl {

namespace {

// Mirrors the parallel kernel's counter layout: slot 0 holds the order coin,
// normal component k draws from slot 2 + 32k; the initial law uses the
// reserved top step counter.
constexpr std::uint64_t kCoinSlot = 0;
constexpr std::uint64_t kNormalBase = 2;
constexpr std::uint64_t kNormalStride = 32;

// The drift and kick bodies repeat the parallel kernel's expressions verbatim
// (and both files are built with -ffp-contract=off) so every intermediate
// rounds the same way and the outputs stay bit-identical.
void apply_drift(std::vector<double>& x, const SamplerConfig& cfg, const TargetModel& target,
                 double h) {
  const int dim = static_cast<int>(x.size());
  if (cfg.scheme == Scheme::lmc_euler) {
    double g[2];
    target.gradient(std::span<const double>(x.data(), dim), std::span<double>(g, dim));
    for (int k = 0; k < dim; ++k) x[k] -= cfg.tau * g[k];
    return;
  }
  switch (cfg.drift_integrator) {
    case DriftIntegrator::exact_flow:
      target.drift_flow(std::span<double>(x.data(), dim), h);
      break;
    case DriftIntegrator::strang_double_well:
      x[0] = strang_dw_step(x[0], h);
      break;
    case DriftIntegrator::heun: {
      double g[2], y[2], g2[2];
      target.gradient(std::span<const double>(x.data(), dim), std::span<double>(g, dim));
      for (int k = 0; k < dim; ++k) y[k] = x[k] - h * g[k];
      target.gradient(std::span<const double>(y, dim), std::span<double>(g2, dim));
      for (int k = 0; k < dim; ++k) x[k] -= 0.5 * h * (g[k] + g2[k]);
      break;
    }
  }
}

}  // namespace

EnsembleState run_ensemble_serial(const SamplerConfig& cfg, const TargetModel& target,
                                  const InitSpec& init) {
  cfg.validate(target);
  const int d = target.dim;
  EnsembleState state;
  state.dim = d;
  state.n_particles = cfg.n_particles;
  state.seed = cfg.seed;
  state.positions.assign(cfg.n_particles * d, 0.0);

  const std::uint64_t key = rng::seed_key(cfg.seed);
  switch (init.kind) {
    case InitSpec::Kind::point: {
      std::vector<double> x0(d, 0.0);
      for (std::size_t k = 0; k < init.x0.size() && k < x0.size(); ++k) x0[k] = init.x0[k];
      for (std::int64_t p = 0; p < cfg.n_particles; ++p)
        for (int k = 0; k < d; ++k) state.positions[p * d + k] = x0[k];
      break;
    }
    case InitSpec::Kind::standard_normal:
      for (std::int64_t p = 0; p < cfg.n_particles; ++p)
        for (int k = 0; k < d; ++k)
          state.positions[p * d + k] =
              rng::normal(key, static_cast<std::uint64_t>(p), rng::kMaxStep,
                          kNormalBase + kNormalStride * static_cast<std::uint64_t>(k));
      break;
    case InitSpec::Kind::custom:
      if (init.custom.size() != state.positions.size())
        throw std::invalid_argument("custom init size mismatch");
      state.positions = init.custom;
      break;
  }

  const double h = cfg.scheme == Scheme::strang_symmetric ? 0.5 * cfg.tau : cfg.tau;
  const double sigma = std::sqrt(2.0 * cfg.tau / cfg.beta);
  const auto& zig = rng::Ziggurat::instance();
  std::vector<double> x(d), z(d);
  auto kick = [&] {
    for (int k = 0; k < d; ++k) x[k] += z[k];
  };
  for (std::int64_t n = 0; n < cfg.n_steps; ++n) {
    const auto ustep = static_cast<std::uint64_t>(n);
    for (std::int64_t p = 0; p < cfg.n_particles; ++p) {
      const auto up = static_cast<std::uint64_t>(p);
      for (int k = 0; k < d; ++k) x[k] = state.positions[p * d + k];
      for (int k = 0; k < d; ++k)
        z[k] = sigma * zig.draw(key, up, ustep,
                                kNormalBase + kNormalStride * static_cast<std::uint64_t>(k));
      switch (cfg.scheme) {
        case Scheme::rslmc: {
          const std::uint64_t cs = cfg.shared_coin ? rng::kSharedStream : up;
          if (rng::uniform01(key, cs, ustep, kCoinSlot) <= 0.5) {
            apply_drift(x, cfg, target, h);
            kick();
          } else {
            kick();
            apply_drift(x, cfg, target, h);
          }
          break;
        }
        case Scheme::lmc_euler:
        case Scheme::lt_drift_first:
          apply_drift(x, cfg, target, h);
          kick();
          break;
        case Scheme::lt_diffusion_first:
          kick();
          apply_drift(x, cfg, target, h);
          break;
        case Scheme::strang_symmetric:
          apply_drift(x, cfg, target, h);
          kick();
          apply_drift(x, cfg, target, h);
          break;
      }
      for (int k = 0; k < d; ++k) state.positions[p * d + k] = x[k];
    }
    ++state.step_index;
  }
  for (double v : state.positions)
    if (!std::isfinite(v)) throw DivergenceError(-1, state.step_index);
  return state;
}

}  // namespace rsl
