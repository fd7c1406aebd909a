// Command-line front end: convergence studies, diagnostics, sample emission,
// and preset listing.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsl/density.hpp"
#include "rsl/diagnostics.hpp"
#include "rsl/format.hpp"
#include "rsl/harness.hpp"
#include "rsl/reference.hpp"
#include "rsl/samplers.hpp"
#include "rsl/targets.hpp"

namespace {

using namespace rsl;

// Config precedence: CLI flag > config file > preset default. CLI11 tells us
// which flags the user actually passed; config keys fill the rest.
struct RunOptions {
  std::string preset = "fig1-logcosh";
  std::string config_path;
  std::string target;
  std::string scheme;
  std::string integrator;
  std::vector<double> taus;
  std::int64_t particles = 0;
  double t_final = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int workers = 0;
  int replicates = 0;
  double bandwidth_scale = 0.0;
  std::string out_dir;
  bool paper_scale = false;
};

void apply_config_map(ExperimentSpec& spec, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, val] : kv) {
    if (key == "target") spec.target_name = val;
    else if (key == "scheme") spec.scheme = scheme_from_name(val);
    else if (key == "drift-integrator") spec.drift_integrator = integrator_from_name(val);
    else if (key == "particles") spec.n_particles = std::stoll(val);
    else if (key == "t-final") spec.t_final = std::stod(val);
    else if (key == "beta") spec.beta = std::stod(val);
    else if (key == "seed") spec.seed = std::stoull(val);
    else if (key == "workers") spec.n_workers = std::stoi(val);
    else if (key == "replicates") spec.replicates = std::stoi(val);
    else if (key == "bandwidth-scale") spec.bandwidth_scale = std::stod(val);
    else if (key == "out-dir") spec.out_dir = val;
    else if (key == "tau") {
      spec.tau_list.clear();
      std::size_t pos = 0;
      while (pos < val.size()) {
        auto comma = val.find(',', pos);
        if (comma == std::string::npos) comma = val.size();
        spec.tau_list.push_back(std::stod(val.substr(pos, comma - pos)));
        pos = comma + 1;
      }
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
}

int cmd_run(CLI::App* cmd, const RunOptions& opt) {
  ExperimentSpec spec = make_preset(opt.preset);
  if (!opt.config_path.empty()) apply_config_map(spec, parse_config_file(opt.config_path));
  if (cmd->count("--target")) spec.target_name = opt.target;
  if (cmd->count("--scheme")) spec.scheme = scheme_from_name(opt.scheme);
  if (cmd->count("--drift-integrator"))
    spec.drift_integrator = integrator_from_name(opt.integrator);
  if (cmd->count("--tau")) spec.tau_list = opt.taus;
  if (cmd->count("--particles")) spec.n_particles = opt.particles;
  if (cmd->count("--t-final")) spec.t_final = opt.t_final;
  if (cmd->count("--beta")) spec.beta = opt.beta;
  if (cmd->count("--seed")) spec.seed = opt.seed;
  if (cmd->count("--workers")) spec.n_workers = opt.workers;
  if (cmd->count("--replicates")) spec.replicates = opt.replicates;
  if (cmd->count("--bandwidth-scale")) spec.bandwidth_scale = opt.bandwidth_scale;
  if (cmd->count("--out-dir")) spec.out_dir = opt.out_dir;
  if (opt.paper_scale) apply_paper_scale(spec);

  const ConvergenceReport report = run_convergence_study(spec);
  const std::string csv = write_report_files(report);
  std::printf("wrote %s\n", csv.c_str());
  std::printf("tau        kl            w1\n");
  for (const auto& r : report.rows)
    std::printf("%-10s %-13s %s\n", format_double(r.tau).c_str(),
                format_double(r.kl).c_str(), format_double(r.w1).c_str());
  if (report.has_kl_fit)
    std::printf("kl slope %.4f (residual %.4f)\n", report.kl_fit.slope,
                report.kl_fit.residual);
  if (report.has_w1_fit) std::printf("w1 slope %.4f\n", report.w1_fit.slope);
  for (const auto& w : report.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("wall time %.1f s\n", report.wall_time_sec);
  return 0;
}

void write_text(const std::string& dir, const std::string& name, const std::string& body) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << body;
  std::printf("wrote %s\n", path.c_str());
}

int cmd_diagnose(const std::string& check, const std::string& target_name, double tau,
                 double beta, std::int64_t steps, std::int64_t particles,
                 std::uint64_t seed, int workers, const std::string& scheme_name_opt,
                 const std::string& out_dir) {
  const TargetModel target = make_target_by_name(target_name);
  if (check == "ou-oracle") {
    if (target.ou_lambda <= 0.0)
      throw std::invalid_argument("ou-oracle needs the ou target");
    std::string csv = "scheme,tau,variance,fixed_point\n";
    for (const char* sn : {"rslmc", "lmc-euler", "lie-trotter-drift-first",
                           "lie-trotter-diffusion-first", "strang-symmetric"}) {
      const auto r = ou_mean_variance_recursion(0.0, target.ou_lambda, beta, tau, steps,
                                                scheme_from_name(sn));
      csv += std::string(sn) + "," + format_double(tau) + "," + format_double(r.variance) +
             "," + format_double(r.fixed_point) + "\n";
      std::printf("%-28s variance %.10f  fixed point %.10f\n", sn, r.variance,
                  r.fixed_point);
    }
    write_text(out_dir, "ou-oracle.csv", csv);
    return 0;
  }
  if (check == "coupling") {
    CouplingParams p;
    p.tau = tau;
    p.beta = beta;
    p.n_steps = steps;
    p.seed = seed;
    p.n_workers = workers;
    const CouplingTrace tr =
        reflection_coupling_run(target, p, particles, default_integrator(target));
    std::string csv = "step,mean_dist,mean_f,frac_coupled\n";
    for (std::size_t s = 0; s < tr.mean_dist.size(); ++s)
      csv += std::to_string(s) + "," + format_double(tr.mean_dist[s]) + "," +
             format_double(tr.mean_f[s]) + "," + format_double(tr.frac_coupled[s]) + "\n";
    write_text(out_dir, "coupling.csv", csv);
    std::printf("lambda_hat %.6f +- %.6f (fit window [%lld,%lld))\n", tr.lambda_hat,
                tr.lambda_half_width, static_cast<long long>(tr.fit_begin),
                static_cast<long long>(tr.fit_end));
    std::printf("coupled fraction at n=%lld: %.6f\n", static_cast<long long>(steps),
                tr.frac_coupled.back());
    return 0;
  }
  if (check == "mass") {
    auto log_rho0 = [](double x) {
      return -0.5 * x * x - 0.5 * std::log(2.0 * M_PI);
    };
    const double defect = transport_mass_check(target, log_rho0, -4.0, 4.0, 8193, tau);
    write_text(out_dir, "mass.csv",
               "t,mass_defect\n" + format_double(tau) + "," + format_double(defect) + "\n");
    std::printf("transport mass defect at t=%s: %.3e\n", format_double(tau).c_str(), defect);
    return 0;
  }
  if (check == "jacobian") {
    std::string csv = "x,t,flow,log_jacobian,group_defect\n";
    for (double x : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
      const FlowJacobian fwd = jacobian_variational(target, x, tau);
      const FlowJacobian bwd = jacobian_variational(target, fwd.point, -tau);
      const double defect = std::fabs(fwd.log_jacobian + bwd.log_jacobian);
      csv += format_double(x) + "," + format_double(tau) + "," + format_double(fwd.point) +
             "," + format_double(fwd.log_jacobian) + "," + format_double(defect) + "\n";
    }
    write_text(out_dir, "jacobian.csv", csv);
    return 0;
  }
  if (check == "moments") {
    SamplerConfig sc;
    sc.tau = tau;
    sc.beta = beta;
    sc.n_steps = steps;
    sc.seed = seed;
    sc.scheme = scheme_from_name(scheme_name_opt);
    sc.drift_integrator = default_integrator(target);
    sc.n_particles = particles;
    sc.n_workers = workers;
    InitSpec init;
    std::string csv = "step,moment2,moment4\n";
    run_ensemble(sc, target, init, [&](const EnsembleState& st) {
      if (st.step_index % 10 != 0 && st.step_index != steps) return;
      const double m2 = empirical_moment(st.positions, st.dim, 2.0);
      const double m4 = empirical_moment(st.positions, st.dim, 4.0);
      csv += std::to_string(st.step_index) + "," + format_double(m2) + "," +
             format_double(m4) + "\n";
    });
    write_text(out_dir, "moments.csv", csv);
    return 0;
  }
  throw std::invalid_argument("unknown check: " + check +
                              " (expected ou-oracle|mass|jacobian|coupling|moments)");
}

int cmd_sample(const std::string& target_name, const std::string& method, std::int64_t count,
               std::uint64_t seed, double beta, const std::string& out,
               const std::string& scheme_opt, double tau, std::int64_t steps, int workers,
               const std::string& integrator_opt, const std::string& init_opt,
               bool shared_coin) {
  const TargetModel target = make_target_by_name(target_name);
  ReferenceSampleSet set;
  if (method == "reference") {
    set = draw_reference(target, count, seed, beta);
  } else if (method == "inverse-cdf") {
    set = sample_logistic_inverse_cdf(count, seed);
  } else if (method == "rejection") {
    set = rejection_sample(target, GaussianProposal{0.0, 1.0}, count, seed, beta);
  } else if (method == "numerical") {
    SamplerConfig sc;
    sc.tau = tau;
    sc.beta = beta;
    sc.n_steps = steps;
    sc.seed = seed;
    sc.scheme = scheme_from_name(scheme_opt);
    sc.drift_integrator = integrator_opt.empty() ? default_integrator(target)
                                                 : integrator_from_name(integrator_opt);
    sc.n_particles = count;
    sc.n_workers = workers;
    sc.shared_coin = shared_coin;
    InitSpec init;
    init.kind = init_opt == "normal" ? InitSpec::Kind::standard_normal
                                     : InitSpec::Kind::point;
    const EnsembleState end = run_ensemble(sc, target, init);
    set.samples = end.positions;
    set.dim = target.dim;
    set.target_name = target.name;
    set.method = "numerical";
    set.seed = seed;
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }
  persist_samples(out, set);
  std::printf("wrote %lld samples (dim %d) to %s\n",
              static_cast<long long>(set.samples.size() / set.dim), set.dim, out.c_str());
  if (set.method == "rejection")
    std::printf("acceptance rate %.4f\n", set.acceptance_rate);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomized-splitting Langevin sampling laboratory"};
  app.require_subcommand(1);

  // run
  RunOptions ro;
  auto* run = app.add_subcommand("run", "run a tau-sweep convergence study");
  run->add_option("--preset", ro.preset, "experiment preset name")
      ->default_val("fig1-logcosh");
  run->add_option("--config", ro.config_path, "key=value config file");
  run->add_option("--target", ro.target);
  run->add_option("--scheme", ro.scheme);
  run->add_option("--drift-integrator", ro.integrator);
  run->add_option("--tau", ro.taus, "step sizes (repeatable or comma-separated)")
      ->delimiter(',');
  run->add_option("--particles", ro.particles);
  run->add_option("--t-final", ro.t_final);
  run->add_option("--beta", ro.beta);
  run->add_option("--seed", ro.seed);
  run->add_option("--workers", ro.workers);
  run->add_option("--replicates", ro.replicates);
  run->add_option("--bandwidth-scale", ro.bandwidth_scale);
  run->add_option("--out-dir", ro.out_dir);
  run->add_flag("--paper-scale", ro.paper_scale, "full-scale protocol (10^7 particles, T=50)");

  // diagnose
  std::string dg_check = "ou-oracle", dg_target = "ou", dg_scheme = "rslmc";
  double dg_tau = 0.1, dg_beta = 1.0;
  std::int64_t dg_steps = 1000, dg_particles = 10000;
  std::uint64_t dg_seed = 0;
  int dg_workers = 0;
  std::string dg_out = ".";
  auto* diag = app.add_subcommand("diagnose", "exact-law and coupling diagnostics");
  diag->add_option("--check", dg_check, "ou-oracle|mass|jacobian|coupling|moments");
  diag->add_option("--target", dg_target);
  diag->add_option("--scheme", dg_scheme);
  diag->add_option("--tau", dg_tau);
  diag->add_option("--beta", dg_beta);
  diag->add_option("--steps", dg_steps);
  diag->add_option("--particles", dg_particles);
  diag->add_option("--seed", dg_seed);
  diag->add_option("--workers", dg_workers);
  diag->add_option("--out-dir", dg_out);

  // sample
  std::string sm_target = "quad-logcosh", sm_method = "reference", sm_out = "samples.txt";
  std::string sm_scheme = "rslmc", sm_integrator, sm_init = "point";
  std::int64_t sm_count = 100000, sm_steps = 200;
  std::uint64_t sm_seed = 0;
  double sm_beta = 1.0, sm_tau = 0.1;
  int sm_workers = 0;
  bool sm_shared = false;
  auto* smp = app.add_subcommand("sample", "emit reference or numerical sample sets");
  smp->add_option("--target", sm_target);
  smp->add_option("--reference-method", sm_method,
                  "reference|inverse-cdf|rejection|numerical");
  smp->add_option("--particles", sm_count);
  smp->add_option("--seed", sm_seed);
  smp->add_option("--beta", sm_beta);
  smp->add_option("--tau", sm_tau);
  smp->add_option("--steps", sm_steps);
  smp->add_option("--scheme", sm_scheme);
  smp->add_option("--drift-integrator", sm_integrator);
  smp->add_option("--init", sm_init, "point|normal");
  smp->add_option("--workers", sm_workers);
  smp->add_option("--out", sm_out);
  smp->add_flag("--shared-coin", sm_shared);

  auto* pre = app.add_subcommand("presets", "list experiment presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run, ro);
    if (diag->parsed())
      return cmd_diagnose(dg_check, dg_target, dg_tau, dg_beta, dg_steps, dg_particles,
                          dg_seed, dg_workers, dg_scheme, dg_out);
    if (smp->parsed())
      return cmd_sample(sm_target, sm_method, sm_count, sm_seed, sm_beta, sm_out, sm_scheme,
                        sm_tau, sm_steps, sm_workers, sm_integrator, sm_init, sm_shared);
    if (pre->parsed()) {
      for (const auto& name : preset_names()) {
        const ExperimentSpec s = make_preset(name);
        std::printf("%-16s target=%-13s taus=", name.c_str(), s.target_name.c_str());
        for (std::size_t i = 0; i < s.tau_list.size(); ++i)
          std::printf("%s%s", i ? "," : "", format_double(s.tau_list[i]).c_str());
        std::printf(" grid=%d%s bandwidth_scale=%s\n", s.grid.n_nodes0,
                    s.grid.n_nodes1 > 0 ? ("x" + std::to_string(s.grid.n_nodes1)).c_str()
                                        : "",
                    format_double(s.bandwidth_scale).c_str());
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
