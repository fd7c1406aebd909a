#pragma once

#include <span>
#include <string>
#include <vector>

namespace rsl {

struct KDEParams {
  double bandwidth = 0.0;        // h > 0
  double bandwidth_scale = 1.0;  // multiplier applied by the caller
  int dim = 1;
};

struct DensityGrid {
  int dim = 1;
  std::vector<std::vector<double>> axes;  // per-axis uniform nodes
  std::vector<double> values;             // row-major over axes
  double cell_measure = 0.0;

  std::size_t n_nodes() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
  }
  bool same_layout(const DensityGrid& other) const;
};

// Silverman's rule: h = sigma * (4 / ((d+2) M))^(1/(d+4)); in 2D sigma is the
// mean of the per-axis sample standard deviations.
double silverman_bandwidth(std::span<const double> samples, int dim);

DensityGrid build_uniform_grid(double lo, double hi, int n_nodes);
DensityGrid build_uniform_grid_2d(double lo0, double hi0, double lo1, double hi1, int n0, int n1);

// Per-axis empirical quantile bounds, uniform nodes between them.
DensityGrid build_quantile_grid(std::span<const double> samples, int dim, int n_nodes,
                                double q_lo, double q_hi);

// Gaussian KDE evaluated on the grid nodes and normalized over the grid.
// Kernel contributions beyond 8h of a node are truncated.
void kde_evaluate(std::span<const double> samples, const KDEParams& params, DensityGrid& grid,
                  int n_workers = 0, bool normalize = true);

// Normalizes values so that sum(values) * cell_measure == 1.
void normalize_grid(DensityGrid& grid);

// sum p_i log(max(p_i,eps)/max(q_i,eps)) * cell; both grids must be normalized
// and share a layout.
double kl_divergence_grid(const DensityGrid& p, const DensityGrid& q, double floor_eps = 1e-12);

// 1D Wasserstein-1 via sorted pairing; the larger set is quantile-resampled
// when the counts differ.
double w1_sorted_1d(std::span<const double> a, std::span<const double> b);

// Mean of |x|^p over the sample set (any dim).
double empirical_moment(std::span<const double> samples, int dim, double p);

double empirical_quantile(std::vector<double> sorted_or_not, double q);

std::string grid_to_csv(const DensityGrid& grid);

}  // namespace rsl
