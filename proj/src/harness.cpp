#include "rsl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rsl/format.hpp"
#include "rsl/linfit.hpp"
#include "rsl/targets.hpp"

namespace rsl {

void ExperimentSpec::validate() const {
  if (tau_list.empty()) throw std::invalid_argument("tau_list is empty");
  for (double t : tau_list)
    if (!(t > 0.0)) throw std::invalid_argument("tau_list must be strictly positive");
  for (std::size_t i = 1; i < tau_list.size(); ++i)
    if (!(tau_list[i] < tau_list[i - 1]))
      throw std::invalid_argument("tau_list must be sorted in decreasing order");
  if (n_particles < 1000)
    throw std::invalid_argument("need at least 10^3 particles for KDE experiments");
  if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (!(bandwidth_scale > 0.0))
    throw std::invalid_argument("bandwidth_scale must be positive");
  make_target_by_name(target_name);  // throws on unknown target
}

std::vector<std::string> preset_names() {
  return {"fig1-logcosh", "fig2-doublewell", "fig3-logistic", "fig4-mog2d"};
}

ExperimentSpec make_preset(const std::string& name) {
  ExperimentSpec s;
  s.label = name;
  if (name == "fig1-logcosh") {
    s.target_name = "quad-logcosh";
    s.tau_list = {1.0, 0.5, 0.25, 0.125, 0.0625};
    s.grid = {512, 0, false, 0.0, 0.0, 1e-4, 1.0 - 1e-4};
    s.bandwidth_scale = 2.0;
    s.drift_integrator = DriftIntegrator::heun;
  } else if (name == "fig2-doublewell") {
    s.target_name = "double-well";
    s.tau_list = {0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625};
    s.grid = {1024, 0, true, -4.0, 4.0, 0.0, 1.0};
    s.bandwidth_scale = 1.0;
    s.drift_integrator = DriftIntegrator::strang_double_well;
  } else if (name == "fig3-logistic") {
    s.target_name = "logistic";
    s.tau_list = {1.0, 0.8, 0.6, 0.4, 0.2};
    s.grid = {512, 0, false, 0.0, 0.0, 1e-4, 1.0 - 1e-4};
    s.bandwidth_scale = 3.0;
    s.drift_integrator = DriftIntegrator::heun;
  } else if (name == "fig4-mog2d") {
    s.target_name = "mog2d";
    s.tau_list = {0.8, 0.6, 0.4, 0.2, 0.1};
    s.grid = {300, 300, false, 0.0, 0.0, 1e-4, 1.0 - 1e-4};
    s.bandwidth_scale = 1.0;
    s.drift_integrator = DriftIntegrator::heun;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return s;
}

void apply_paper_scale(ExperimentSpec& spec) {
  spec.n_particles = 10000000;
  spec.t_final = 50.0;
}

SlopeFit fit_loglog_slope(std::span<const double> taus, std::span<const double> values,
                          std::vector<std::string>* warnings) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (values[i] > 0.0) {
      lx.push_back(std::log(taus[i]));
      ly.push_back(std::log(values[i]));
    } else if (warnings) {
      warnings->push_back("excluded nonpositive row at tau=" + format_double(taus[i]));
    }
  }
  if (lx.size() < 2) throw std::invalid_argument("fit_loglog_slope: need >= 2 positive rows");
  const OlsFit f = ols_fit(lx, ly);
  return {f.slope, f.intercept, f.residual, static_cast<int>(lx.size())};
}

namespace {

DensityGrid build_protocol_grid(const GridSpec& g, std::span<const double> ref_samples,
                                int dim) {
  if (dim == 2) return build_quantile_grid(ref_samples, 2, g.n_nodes0, g.q_lo, g.q_hi);
  if (g.fixed) return build_uniform_grid(g.lo, g.hi, g.n_nodes0);
  return build_quantile_grid(ref_samples, 1, g.n_nodes0, g.q_lo, g.q_hi);
}

}  // namespace

ConvergenceReport run_convergence_study(const ExperimentSpec& spec) {
  spec.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const TargetModel target = make_target_by_name(spec.target_name);

  ConvergenceReport report;
  report.spec = spec;

  const ReferenceSampleSet ref =
      draw_reference(target, spec.n_particles, spec.seed + 0x9e3779b9ULL, spec.beta);
  DensityGrid grid = build_protocol_grid(spec.grid, ref.samples, target.dim);

  KDEParams kde;
  kde.dim = target.dim;
  kde.bandwidth_scale = spec.bandwidth_scale;
  kde.bandwidth = spec.bandwidth_scale * silverman_bandwidth(ref.samples, target.dim);

  DensityGrid ref_grid = grid;
  kde_evaluate(ref.samples, kde, ref_grid, spec.n_workers);

  for (std::size_t ti = 0; ti < spec.tau_list.size(); ++ti) {
    const double tau = spec.tau_list[ti];
    std::vector<double> kls, w1s;
    for (int rep = 0; rep < spec.replicates; ++rep) {
      SamplerConfig sc;
      sc.tau = tau;
      sc.beta = spec.beta;
      sc.n_steps = static_cast<std::int64_t>(std::ceil(spec.t_final / tau));
      sc.seed = spec.seed + 1000003ULL * ti + 7919ULL * static_cast<std::uint64_t>(rep) + 1;
      sc.scheme = spec.scheme;
      sc.drift_integrator = spec.drift_integrator;
      sc.n_particles = spec.n_particles;
      sc.n_workers = spec.n_workers;
      InitSpec init;
      init.kind = InitSpec::Kind::standard_normal;
      EnsembleState end;
      try {
        end = run_ensemble(sc, target, init);
      } catch (const DivergenceError& e) {
        throw std::runtime_error("ensemble diverged at tau=" + format_double(tau) + ": " +
                                 e.what());
      }
      DensityGrid num_grid = grid;
      kde_evaluate(end.positions, kde, num_grid, spec.n_workers);
      kls.push_back(kl_divergence_grid(num_grid, ref_grid));
      if (target.dim == 1) w1s.push_back(w1_sorted_1d(end.positions, ref.samples));
    }
    auto mean_se = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double se = 0.0;
      if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        se = std::sqrt(ss / static_cast<double>(v.size() - 1) /
                       static_cast<double>(v.size()));
      }
      return std::pair<double, double>{m, se};
    };
    ConvergenceRow row;
    row.tau = tau;
    std::tie(row.kl, row.kl_stderr) = mean_se(kls);
    if (!w1s.empty()) std::tie(row.w1, row.w1_stderr) = mean_se(w1s);
    report.rows.push_back(row);
  }

  if (report.rows.size() >= 3) {
    std::vector<double> taus, kls, w1s;
    for (const auto& r : report.rows) {
      taus.push_back(r.tau);
      kls.push_back(r.kl);
      w1s.push_back(r.w1);
    }
    report.kl_fit = fit_loglog_slope(taus, kls, &report.warnings);
    report.has_kl_fit = true;
    if (target.dim == 1) {
      report.w1_fit = fit_loglog_slope(taus, w1s, &report.warnings);
      report.has_w1_fit = true;
    }
  } else {
    report.warnings.push_back("slope fit skipped: needs >= 3 rows");
  }

  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

std::string report_to_csv(const ConvergenceReport& report) {
  std::string out = "tau,kl,kl_stderr,w1,w1_stderr\n";
  for (const auto& r : report.rows) {
    out += format_double(r.tau);
    out += ',';
    out += format_double(r.kl);
    out += ',';
    out += format_double(r.kl_stderr);
    out += ',';
    out += format_double(r.w1);
    out += ',';
    out += format_double(r.w1_stderr);
    out += '\n';
  }
  return out;
}

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string emit_figure(const ConvergenceReport& report, const std::string& title) {
  if (report.rows.empty()) throw std::invalid_argument("emit_figure: empty report");
  const double w = 640.0, h = 480.0;
  const double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;

  double lx_min = 1e300, lx_max = -1e300, ly_min = 1e300, ly_max = -1e300;
  std::vector<std::pair<double, double>> pts;  // (log10 tau, log10 kl)
  for (const auto& r : report.rows) {
    if (r.kl <= 0.0) continue;
    const double lx = std::log10(r.tau), ly = std::log10(r.kl);
    pts.emplace_back(lx, ly);
    lx_min = std::min(lx_min, lx);
    lx_max = std::max(lx_max, lx);
    ly_min = std::min(ly_min, ly);
    ly_max = std::max(ly_max, ly);
  }
  const bool single = pts.size() < 2;
  if (single && !pts.empty()) {
    lx_min -= 0.5;
    lx_max += 0.5;
    ly_min -= 0.5;
    ly_max += 0.5;
  }
  // Reference lines anchored at the coarsest-tau point can extend the range.
  if (!single) {
    const auto& anchor = *std::max_element(pts.begin(), pts.end());
    for (const auto& p : pts) {
      ly_min = std::min(ly_min, anchor.second + 4.0 * (p.first - anchor.first));
    }
  }
  const double pad_x = 0.05 * (lx_max - lx_min + 1e-9);
  const double pad_y = 0.05 * (ly_max - ly_min + 1e-9);
  lx_min -= pad_x;
  lx_max += pad_x;
  ly_min -= pad_y;
  ly_max += pad_y;

  auto sx = [&](double lx) { return ml + (lx - lx_min) / (lx_max - lx_min) * (w - ml - mr); };
  auto sy = [&](double ly) {
    return h - mb - (ly - ly_min) / (ly_max - ly_min) * (h - mt - mb);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + title +
         "</text>\n";
  // Axes box.
  svg += "<rect x=\"" + fmt2(ml) + "\" y=\"" + fmt2(mt) + "\" width=\"" + fmt2(w - ml - mr) +
         "\" height=\"" + fmt2(h - mt - mb) +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  // Decade ticks.
  for (int d = static_cast<int>(std::ceil(lx_min)); d <= static_cast<int>(std::floor(lx_max));
       ++d) {
    const double x = sx(d);
    svg += "<line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(h - mb) + "\" x2=\"" + fmt2(x) +
           "\" y2=\"" + fmt2(h - mb + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(h - mb + 18) +
           "\" text-anchor=\"middle\" font-size=\"11\">1e" + std::to_string(d) + "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ly_min)); d <= static_cast<int>(std::floor(ly_max));
       ++d) {
    const double y = sy(d);
    svg += "<line x1=\"" + fmt2(ml - 5) + "\" y1=\"" + fmt2(y) + "\" x2=\"" + fmt2(ml) +
           "\" y2=\"" + fmt2(y) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt2(ml - 8) + "\" y=\"" + fmt2(y + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">1e" + std::to_string(d) + "</text>\n";
  }
  svg += "<text x=\"320\" y=\"" + fmt2(h - 12) +
         "\" text-anchor=\"middle\" font-size=\"13\">step size tau</text>\n";
  svg += "<text x=\"16\" y=\"260\" text-anchor=\"middle\" font-size=\"13\" "
         "transform=\"rotate(-90 16 260)\">KL divergence</text>\n";

  if (!single) {
    // Dashed tau^2 / tau^4 reference lines anchored at the coarsest-tau point.
    const auto& anchor = *std::max_element(pts.begin(), pts.end());
    const double lx_lo = pts.back().first < pts.front().first ? pts.back().first
                                                              : pts.front().first;
    for (double order : {2.0, 4.0}) {
      const double y0 = anchor.second;
      const double y1 = anchor.second + order * (lx_lo - anchor.first);
      svg += "<line x1=\"" + fmt2(sx(anchor.first)) + "\" y1=\"" + fmt2(sy(y0)) + "\" x2=\"" +
             fmt2(sx(lx_lo)) + "\" y2=\"" + fmt2(sy(y1)) +
             "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
      svg += "<text x=\"" + fmt2(sx(lx_lo) + 4) + "\" y=\"" + fmt2(sy(y1)) +
             "\" font-size=\"11\" fill=\"gray\">tau^" +
             std::to_string(static_cast<int>(order)) + "</text>\n";
    }
    // Data polyline.
    std::string path = "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" "
                       "points=\"";
    for (const auto& p : pts) path += fmt2(sx(p.first)) + "," + fmt2(sy(p.second)) + " ";
    path += "\"/>\n";
    svg += path;
  }
  for (const auto& p : pts)
    svg += "<circle cx=\"" + fmt2(sx(p.first)) + "\" cy=\"" + fmt2(sy(p.second)) +
           "\" r=\"3.5\" fill=\"#1f4e9c\"/>\n";
  svg += "<text x=\"" + fmt2(w - mr - 8) + "\" y=\"" + fmt2(mt + 18) +
         "\" text-anchor=\"end\" font-size=\"12\" fill=\"#1f4e9c\">KL vs tau</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string write_report_files(const ConvergenceReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(report.spec.out_dir);
  const std::string base = report.spec.out_dir + "/" + report.spec.label;
  {
    std::ofstream f(base + ".csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + base + ".csv");
    f << report_to_csv(report);
  }
  {
    std::ofstream f(base + ".svg", std::ios::binary);
    f << emit_figure(report, report.spec.label);
  }
  return base + ".csv";
}

void persist_samples(const std::string& path, const ReferenceSampleSet& set) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  const std::int64_t count = static_cast<std::int64_t>(set.samples.size()) / set.dim;
  f << "# dim=" << set.dim << " count=" << count << " seed=" << set.seed << "\n";
  for (std::int64_t i = 0; i < count; ++i) {
    for (int k = 0; k < set.dim; ++k) {
      if (k) f << ' ';
      f << format_double(set.samples[i * set.dim + k]);
    }
    f << '\n';
  }
}

ReferenceSampleSet load_samples(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string header;
  if (!std::getline(f, header) || header.rfind("# dim=", 0) != 0)
    throw std::runtime_error(path + ":1: missing or malformed header");
  ReferenceSampleSet set;
  std::int64_t count = -1;
  {
    std::istringstream hs(header.substr(1));
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(path + ":1: malformed header field '" + tok + "'");
      const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
      try {
        if (key == "dim") set.dim = std::stoi(val);
        else if (key == "count") count = std::stoll(val);
        else if (key == "seed") set.seed = std::stoull(val);
        else throw std::runtime_error("");
      } catch (...) {
        throw std::runtime_error(path + ":1: bad header field '" + tok + "'");
      }
    }
  }
  if (set.dim < 1 || count < 0)
    throw std::runtime_error(path + ":1: header must define dim and count");
  set.samples.reserve(static_cast<std::size_t>(count) * set.dim);
  std::string line;
  std::int64_t lineno = 1, rows = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    for (int k = 0; k < set.dim; ++k) {
      double v;
      if (!(ls >> v))
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": field " +
                                 std::to_string(k + 1) + " is not a number");
      set.samples.push_back(v);
    }
    double extra;
    if (ls >> extra)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": field " +
                               std::to_string(set.dim + 1) + " is unexpected");
    ++rows;
  }
  if (rows != count)
    throw std::runtime_error(path + ": header count=" + std::to_string(count) + " but " +
                             std::to_string(rows) + " rows present");
  set.method = "file";
  return set;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace rsl
