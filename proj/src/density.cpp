#include "rsl/density.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsl/format.hpp"
#include "rsl/pairwise.hpp"

namespace rsl {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kTruncRadii = 8.0;  // kernel mass beyond 8h is < 1e-14

double axis_std(std::span<const double> samples, int dim, int axis) {
  const std::size_t m = samples.size() / dim;
  double mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) mean += samples[i * dim + axis];
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = samples[i * dim + axis] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(m - 1));
}

int workers_or_default(int n) { return n > 0 ? n : omp_get_max_threads(); }

}  // namespace

bool DensityGrid::same_layout(const DensityGrid& other) const {
  return dim == other.dim && axes == other.axes;
}

double silverman_bandwidth(std::span<const double> samples, int dim) {
  if (dim < 1 || dim > 2) throw std::invalid_argument("silverman: dim must be 1 or 2");
  const std::size_t m = samples.size() / dim;
  if (m < 2) throw std::invalid_argument("silverman: need at least 2 samples");
  double sigma = 0.0;
  for (int a = 0; a < dim; ++a) sigma += axis_std(samples, dim, a);
  sigma /= dim;
  if (sigma <= 0.0) throw std::invalid_argument("silverman: degenerate (zero-variance) input");
  const double md = static_cast<double>(m);
  return sigma * std::pow(4.0 / ((dim + 2) * md), 1.0 / (dim + 4));
}

DensityGrid build_uniform_grid(double lo, double hi, int n_nodes) {
  if (n_nodes < 2 || !(hi > lo)) throw std::invalid_argument("bad grid spec");
  DensityGrid g;
  g.dim = 1;
  g.axes.resize(1);
  auto& a = g.axes[0];
  a.resize(n_nodes);
  const double dx = (hi - lo) / (n_nodes - 1);
  for (int i = 0; i < n_nodes; ++i) a[i] = lo + dx * i;
  g.values.assign(n_nodes, 0.0);
  g.cell_measure = dx;
  return g;
}

DensityGrid build_uniform_grid_2d(double lo0, double hi0, double lo1, double hi1, int n0,
                                  int n1) {
  if (n0 < 2 || n1 < 2 || !(hi0 > lo0) || !(hi1 > lo1))
    throw std::invalid_argument("bad grid spec");
  DensityGrid g;
  g.dim = 2;
  g.axes.resize(2);
  const double dx = (hi0 - lo0) / (n0 - 1);
  const double dy = (hi1 - lo1) / (n1 - 1);
  g.axes[0].resize(n0);
  for (int i = 0; i < n0; ++i) g.axes[0][i] = lo0 + dx * i;
  g.axes[1].resize(n1);
  for (int i = 0; i < n1; ++i) g.axes[1][i] = lo1 + dy * i;
  g.values.assign(static_cast<std::size_t>(n0) * n1, 0.0);
  g.cell_measure = dx * dy;
  return g;
}

double empirical_quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of empty set");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(i);
  return v[i] + frac * (v[i + 1] - v[i]);
}

DensityGrid build_quantile_grid(std::span<const double> samples, int dim, int n_nodes,
                                double q_lo, double q_hi) {
  if (!(q_lo < q_hi)) throw std::invalid_argument("build_quantile_grid: q_lo must be < q_hi");
  const std::size_t m = samples.size() / dim;
  if (m < 2) throw std::invalid_argument("build_quantile_grid: too few samples");
  std::vector<double> lo(dim), hi(dim);
  for (int a = 0; a < dim; ++a) {
    std::vector<double> axis(m);
    for (std::size_t i = 0; i < m; ++i) axis[i] = samples[i * dim + a];
    lo[a] = empirical_quantile(axis, q_lo);
    hi[a] = empirical_quantile(std::move(axis), q_hi);
    if (!(hi[a] > lo[a])) throw std::invalid_argument("build_quantile_grid: degenerate axis");
  }
  if (dim == 1) return build_uniform_grid(lo[0], hi[0], n_nodes);
  return build_uniform_grid_2d(lo[0], hi[0], lo[1], hi[1], n_nodes, n_nodes);
}

void normalize_grid(DensityGrid& grid) {
  const double mass = pairwise_sum(grid.values) * grid.cell_measure;
  if (!(mass > 0.0)) throw std::runtime_error("normalize_grid: nonpositive mass");
  for (double& v : grid.values) v /= mass;
}

void kde_evaluate(std::span<const double> samples, const KDEParams& params, DensityGrid& grid,
                  int n_workers, bool normalize) {
  const double h = params.bandwidth;
  if (!(h > 0.0)) throw std::invalid_argument("kde: bandwidth must be positive");
  const int dim = grid.dim;
  const auto m = static_cast<std::int64_t>(samples.size() / dim);
  if (m < 1) throw std::invalid_argument("kde: empty sample set");
  const double inv2h2 = 0.5 / (h * h);
  const double radius = kTruncRadii * h;
  const int workers = workers_or_default(n_workers);

  if (dim == 1) {
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const auto& nodes = grid.axes[0];
    const double norm = kInvSqrt2Pi / (static_cast<double>(m) * h);
    const auto nn = static_cast<std::int64_t>(nodes.size());
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t i = 0; i < nn; ++i) {
      const double x = nodes[i];
      const auto b = std::lower_bound(s.begin(), s.end(), x - radius);
      const auto e = std::upper_bound(s.begin(), s.end(), x + radius);
      double acc = 0.0;
      for (auto it = b; it != e; ++it) {
        const double d = x - *it;
        acc += std::exp(-d * d * inv2h2);
      }
      grid.values[i] = norm * acc;
    }
  } else {
    // Sort by the first coordinate; per node, binary-search the x window and
    // reject on the full squared radius.
    std::vector<std::pair<double, double>> s(m);
    for (std::int64_t i = 0; i < m; ++i) s[i] = {samples[2 * i], samples[2 * i + 1]};
    std::sort(s.begin(), s.end());
    const auto& ax = grid.axes[0];
    const auto& ay = grid.axes[1];
    const double norm = kInvSqrt2Pi * kInvSqrt2Pi / (static_cast<double>(m) * h * h);
    const double r2 = radius * radius;
    const auto n0 = static_cast<std::int64_t>(ax.size());
    const auto n1 = static_cast<std::int64_t>(ay.size());
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t i = 0; i < n0; ++i) {
      const double x = ax[i];
      const auto b = std::lower_bound(s.begin(), s.end(),
                                      std::make_pair(x - radius, -1e308));
      const auto e = std::upper_bound(s.begin(), s.end(),
                                      std::make_pair(x + radius, 1e308));
      for (std::int64_t j = 0; j < n1; ++j) {
        const double y = ay[j];
        double acc = 0.0;
        for (auto it = b; it != e; ++it) {
          const double dx = x - it->first;
          const double dy = y - it->second;
          const double q = dx * dx + dy * dy;
          if (q <= r2) acc += std::exp(-q * inv2h2);
        }
        grid.values[i * n1 + j] = norm * acc;
      }
    }
  }
  if (normalize) normalize_grid(grid);
}

double kl_divergence_grid(const DensityGrid& p, const DensityGrid& q, double floor_eps) {
  if (!p.same_layout(q)) throw std::invalid_argument("kl: mismatched grids");
  std::vector<double> terms(p.values.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double pi = std::max(p.values[i], floor_eps);
    const double qi = std::max(q.values[i], floor_eps);
    terms[i] = p.values[i] * std::log(pi / qi);
  }
  return pairwise_sum(terms) * p.cell_measure;
}

double w1_sorted_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("w1: empty sample set");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  // Quantile-resample the larger set down to the smaller count.
  auto resample = [](const std::vector<double>& big, std::size_t n) {
    std::vector<double> out(n);
    const double scale = static_cast<double>(big.size()) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto idx = static_cast<std::size_t>((static_cast<double>(i) + 0.5) * scale);
      if (idx >= big.size()) idx = big.size() - 1;
      out[i] = big[idx];
    }
    return out;
  };
  if (sa.size() > sb.size()) sa = resample(sa, sb.size());
  if (sb.size() > sa.size()) sb = resample(sb, sa.size());
  std::vector<double> diff(sa.size());
  for (std::size_t i = 0; i < sa.size(); ++i) diff[i] = std::fabs(sa[i] - sb[i]);
  return pairwise_sum(diff) / static_cast<double>(diff.size());
}

double empirical_moment(std::span<const double> samples, int dim, double p) {
  if (p < 1.0) throw std::invalid_argument("empirical_moment: p must be >= 1");
  const std::size_t m = samples.size() / dim;
  if (m == 0) throw std::invalid_argument("empirical_moment: empty sample set");
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) {
    double n2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double x = samples[i * dim + k];
      n2 += x * x;
    }
    v[i] = p == 2.0 ? n2 : std::pow(n2, 0.5 * p);
  }
  return pairwise_sum(v) / static_cast<double>(m);
}

std::string grid_to_csv(const DensityGrid& grid) {
  std::string out;
  if (grid.dim == 1) {
    out = "x,value\n";
    for (std::size_t i = 0; i < grid.axes[0].size(); ++i)
      out += format_double(grid.axes[0][i]) + "," + format_double(grid.values[i]) + "\n";
  } else {
    out = "x,y,value\n";
    const std::size_t n1 = grid.axes[1].size();
    for (std::size_t i = 0; i < grid.axes[0].size(); ++i)
      for (std::size_t j = 0; j < n1; ++j)
        out += format_double(grid.axes[0][i]) + "," + format_double(grid.axes[1][j]) + "," +
               format_double(grid.values[i * n1 + j]) + "\n";
  }
  return out;
}

}  // namespace rsl
