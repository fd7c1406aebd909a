#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rsl {

enum class ReferenceRecipe { inverse_cdf, rejection, mixture_direct, gaussian_exact };

struct MixtureSpec {
  std::vector<double> weights;
  std::vector<std::array<double, 2>> means;
  std::vector<std::array<double, 4>> covariances;  // row-major 2x2
  // Cholesky factors (lower triangular: l00, l10, l11), filled by validate().
  std::vector<std::array<double, 3>> chol;
  void validate();  // throws std::invalid_argument on bad weights / covariances
};

// A potential U at unit temperature; beta is applied by the samplers.
struct TargetModel {
  std::string name;
  int dim = 1;
  std::function<double(std::span<const double>)> potential;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  // Exact (or analytic-composition) flow of xdot = -grad U, in place; empty if
  // unavailable.
  std::function<void(std::span<double>, double)> drift_flow;
  // Laplacian of U (used by the Jacobian ODE); falls back to finite
  // differences of the gradient when empty.
  std::function<double(std::span<const double>)> laplacian;
  ReferenceRecipe recipe = ReferenceRecipe::rejection;

  double ou_lambda = 0.0;      // > 0 only for the OU target
  double quad_lambda = 0.0;    // quadratic-logcosh parameters, used by the
  double quad_epsilon = 0.0;   // analytic rejection acceptance ratio
  std::optional<MixtureSpec> mixture;

  bool has_drift_flow() const { return static_cast<bool>(drift_flow); }

  double potential_at(double x) const { return potential(std::span<const double>(&x, 1)); }
  double gradient_at(double x) const {
    double g;
    gradient(std::span<const double>(&x, 1), std::span<double>(&g, 1));
    return g;
  }
  double divergence_of_drift(std::span<const double> x) const;  // div b = -laplacian U
};

TargetModel make_quadratic_logcosh(double lambda, double epsilon);
TargetModel make_double_well();
TargetModel make_logistic();
TargetModel make_mixture_2d();
TargetModel make_ou(double lambda);

// CLI names: quad-logcosh, double-well, logistic, mog2d, ou.
TargetModel make_target_by_name(const std::string& name);

}  // namespace rsl
