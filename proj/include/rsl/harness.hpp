#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rsl/density.hpp"
#include "rsl/reference.hpp"
#include "rsl/samplers.hpp"

namespace rsl {

struct GridSpec {
  int n_nodes0 = 512;
  int n_nodes1 = 0;      // > 0 only for 2D grids
  bool fixed = false;    // fixed range instead of quantile bounds
  double lo = 0.0;       // fixed-range bounds
  double hi = 0.0;
  double q_lo = 1e-4;    // quantile bounds
  double q_hi = 1.0 - 1e-4;
};

struct ExperimentSpec {
  std::string label = "custom";
  std::string target_name = "quad-logcosh";
  Scheme scheme = Scheme::rslmc;
  std::vector<double> tau_list;
  std::int64_t n_particles = 200000;
  double t_final = 20.0;
  double beta = 1.0;
  std::uint64_t seed = 0;
  GridSpec grid;
  double bandwidth_scale = 1.0;
  std::string out_dir = ".";
  int replicates = 3;
  int n_workers = 0;
  DriftIntegrator drift_integrator = DriftIntegrator::heun;

  void validate() const;  // throws std::invalid_argument
};

struct ConvergenceRow {
  double tau = 0.0;
  double kl = 0.0;
  double kl_stderr = 0.0;
  double w1 = 0.0;
  double w1_stderr = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  int n_used = 0;
};

struct ConvergenceReport {
  ExperimentSpec spec;
  std::vector<ConvergenceRow> rows;
  SlopeFit kl_fit;
  SlopeFit w1_fit;
  bool has_kl_fit = false;
  bool has_w1_fit = false;
  std::vector<std::string> warnings;
  double wall_time_sec = 0.0;
};

// Named experiment presets: fig1-logcosh, fig2-doublewell, fig3-logistic,
// fig4-mog2d.
std::vector<std::string> preset_names();
ExperimentSpec make_preset(const std::string& name);
// Switches a spec to full production scale (10^7 particles, T = 50).
void apply_paper_scale(ExperimentSpec& spec);

// Runs the tau sweep: ensemble to T per (tau, replicate), KDE of endpoint and
// reference laws on the protocol grid, KL (and W1 in 1D), log-log slope fits.
ConvergenceReport run_convergence_study(const ExperimentSpec& spec);

// OLS on (log tau, log value); rows with nonpositive values are excluded and
// reported through `warnings`. Needs >= 2 usable rows.
SlopeFit fit_loglog_slope(std::span<const double> taus, std::span<const double> values,
                          std::vector<std::string>* warnings = nullptr);

// CSV with header tau,kl,kl_stderr,w1,w1_stderr; shortest round-trip decimals.
std::string report_to_csv(const ConvergenceReport& report);

// Standalone SVG: log-log axes, data markers + line, dashed tau^2 and tau^4
// reference lines anchored at the coarsest-tau point. Deterministic bytes.
std::string emit_figure(const ConvergenceReport& report, const std::string& title);

// Writes CSV and SVG into spec.out_dir as <label>.csv / <label>.svg; returns
// the CSV path.
std::string write_report_files(const ConvergenceReport& report);

// Text format: header "# dim=<d> count=<M> seed=<s>", one whitespace-separated
// row per sample; round trip is bit-exact.
void persist_samples(const std::string& path, const ReferenceSampleSet& set);
ReferenceSampleSet load_samples(const std::string& path);

// Flat key=value file, '#' comments, blank lines ignored. Malformed lines
// throw with the line number.
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace rsl
