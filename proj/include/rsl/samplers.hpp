#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsl/targets.hpp"

namespace rsl {

enum class Scheme {
  rslmc,
  lmc_euler,
  lt_drift_first,
  lt_diffusion_first,
  strang_symmetric,
};

enum class DriftIntegrator { heun, strang_double_well, exact_flow };

Scheme scheme_from_name(const std::string& s);
std::string scheme_name(Scheme s);
DriftIntegrator integrator_from_name(const std::string& s);
DriftIntegrator default_integrator(const TargetModel& target);

struct SamplerConfig {
  double tau = 0.1;
  double beta = 1.0;
  std::int64_t n_steps = 0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::rslmc;
  DriftIntegrator drift_integrator = DriftIntegrator::heun;
  std::int64_t n_particles = 1;
  int n_workers = 0;  // 0 = library default; the sampled law never depends on it
  bool shared_coin = false;

  void validate(const TargetModel& target) const;
};

struct EnsembleState {
  std::vector<double> positions;  // n_particles x dim, row-major
  int dim = 1;
  std::int64_t n_particles = 0;
  std::int64_t step_index = 0;
  std::uint64_t seed = 0;

  std::span<const double> particle(std::int64_t p) const {
    return {positions.data() + p * dim, static_cast<std::size_t>(dim)};
  }
};

struct DivergenceError : std::runtime_error {
  std::int64_t particle;
  std::int64_t step;
  DivergenceError(std::int64_t p, std::int64_t s)
      : std::runtime_error("non-finite position at particle " + std::to_string(p) +
                           ", step " + std::to_string(s)),
        particle(p),
        step(s) {}
};

struct InitSpec {
  enum class Kind { point, standard_normal, custom };
  Kind kind = Kind::point;
  std::vector<double> x0;      // point mass location (defaults to origin)
  std::vector<double> custom;  // n_particles x dim when kind == custom
};

// Single-particle building blocks (also used by tests).
void heun_step(std::span<double> x, double h,
               const std::function<void(std::span<const double>, std::span<double>)>& drift);
double strang_dw_step(double x, double h);
void diffusion_kick(std::span<double> x, double tau, double beta, std::span<const double> z);

// Advances every particle by one step of the configured scheme.
void advance_step(EnsembleState& state, const SamplerConfig& cfg, const TargetModel& target);

// Runs n_steps steps from the given initial law. on_step, when set, is invoked
// serially after every step.
EnsembleState run_ensemble(const SamplerConfig& cfg, const TargetModel& target,
                           const InitSpec& init,
                           const std::function<void(const EnsembleState&)>& on_step = {});

}  // namespace rsl
