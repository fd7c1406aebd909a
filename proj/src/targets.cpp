#include "rsl/targets.hpp"

#include <cmath>
#include <stdexcept>

namespace rsl {

namespace {

// log(2 cosh x) without overflow.
double log_2cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

double logsumexp2(double a, double b) {
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

void MixtureSpec::validate() {
  if (weights.size() != means.size() || weights.size() != covariances.size())
    throw std::invalid_argument("mixture: component count mismatch");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (std::fabs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("mixture: weights do not sum to 1");
  chol.clear();
  for (const auto& c : covariances) {
    const double a = c[0], b = c[1], bt = c[2], d = c[3];
    if (std::fabs(b - bt) > 1e-14) throw std::invalid_argument("mixture: covariance not symmetric");
    const double l00sq = a;
    if (l00sq <= 0.0) throw std::invalid_argument("mixture: covariance not positive definite");
    const double l00 = std::sqrt(l00sq);
    const double l10 = b / l00;
    const double l11sq = d - l10 * l10;
    if (l11sq <= 0.0) throw std::invalid_argument("mixture: covariance not positive definite");
    chol.push_back({l00, l10, std::sqrt(l11sq)});
  }
}

double TargetModel::divergence_of_drift(std::span<const double> x) const {
  if (laplacian) return -laplacian(x);
  // Central finite difference of the gradient's divergence.
  const double h = 1e-5;
  std::vector<double> xp(x.begin(), x.end()), gp(dim), gm(dim);
  double div = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double orig = xp[k];
    xp[k] = orig + h;
    gradient(xp, gp);
    xp[k] = orig - h;
    gradient(xp, gm);
    xp[k] = orig;
    div -= (gp[k] - gm[k]) / (2.0 * h);
  }
  return div;
}

TargetModel make_quadratic_logcosh(double lambda, double epsilon) {
  if (lambda <= 0.0) throw std::invalid_argument("quad-logcosh: lambda must be positive");
  if (epsilon < 0.0) throw std::invalid_argument("quad-logcosh: epsilon must be nonnegative");
  TargetModel t;
  t.name = "quad-logcosh";
  t.dim = 1;
  t.recipe = ReferenceRecipe::rejection;
  t.quad_lambda = lambda;
  t.quad_epsilon = epsilon;
  t.potential = [lambda, epsilon](std::span<const double> x) {
    return 0.5 * lambda * x[0] * x[0] + epsilon * log_2cosh(x[0]);
  };
  t.gradient = [lambda, epsilon](std::span<const double> x, std::span<double> g) {
    g[0] = lambda * x[0] + epsilon * std::tanh(x[0]);
  };
  t.laplacian = [lambda, epsilon](std::span<const double> x) {
    const double th = std::tanh(x[0]);
    return lambda + epsilon * (1.0 - th * th);
  };
  return t;
}

TargetModel make_double_well() {
  TargetModel t;
  t.name = "double-well";
  t.dim = 1;
  t.recipe = ReferenceRecipe::rejection;
  t.potential = [](std::span<const double> x) {
    const double s = x[0] * x[0] - 1.0;
    return s * s;
  };
  t.gradient = [](std::span<const double> x, std::span<double> g) {
    g[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
  };
  t.laplacian = [](std::span<const double> x) { return 12.0 * x[0] * x[0] - 4.0; };
  // Analytic Strang composition of the cubic and linear subflows.
  t.drift_flow = [](std::span<double> x, double h) {
    double v = x[0];
    v = v / std::sqrt(1.0 + 8.0 * 0.5 * h * v * v);
    v = v * std::exp(4.0 * h);
    v = v / std::sqrt(1.0 + 8.0 * 0.5 * h * v * v);
    x[0] = v;
  };
  return t;
}

TargetModel make_logistic() {
  TargetModel t;
  t.name = "logistic";
  t.dim = 1;
  t.recipe = ReferenceRecipe::inverse_cdf;
  // U(x) = x + 2 log(1 + e^{-x}), evaluated on |x| and mirrored.
  t.potential = [](std::span<const double> x) {
    const double a = std::fabs(x[0]);
    return a + 2.0 * std::log1p(std::exp(-a));
  };
  t.gradient = [](std::span<const double> x, std::span<double> g) {
    g[0] = std::tanh(0.5 * x[0]);
  };
  t.laplacian = [](std::span<const double> x) {
    const double th = std::tanh(0.5 * x[0]);
    return 0.5 * (1.0 - th * th);
  };
  return t;
}

TargetModel make_mixture_2d() {
  MixtureSpec spec;
  spec.weights = {0.5, 0.5};
  spec.means = {{-2.0, 0.0}, {2.0, 0.0}};
  spec.covariances = {{0.6, 0.2, 0.2, 0.5}, {0.5, -0.1, -0.1, 0.7}};
  spec.validate();

  // Precompute inverses and log normalizers.
  struct Comp {
    double mx, my, i00, i01, i11, lognorm;
  };
  std::vector<Comp> comps;
  for (std::size_t k = 0; k < spec.weights.size(); ++k) {
    const auto& c = spec.covariances[k];
    const double det = c[0] * c[3] - c[1] * c[2];
    Comp cc;
    cc.mx = spec.means[k][0];
    cc.my = spec.means[k][1];
    cc.i00 = c[3] / det;
    cc.i01 = -c[1] / det;
    cc.i11 = c[0] / det;
    cc.lognorm = std::log(spec.weights[k]) - std::log(2.0 * M_PI) - 0.5 * std::log(det);
    comps.push_back(cc);
  }

  auto logcomp = [comps](std::span<const double> x, int k) {
    const Comp& c = comps[k];
    const double dx = x[0] - c.mx, dy = x[1] - c.my;
    const double q = c.i00 * dx * dx + 2.0 * c.i01 * dx * dy + c.i11 * dy * dy;
    return c.lognorm - 0.5 * q;
  };

  TargetModel t;
  t.name = "mog2d";
  t.dim = 2;
  t.recipe = ReferenceRecipe::mixture_direct;
  t.mixture = spec;
  t.potential = [logcomp](std::span<const double> x) {
    return -logsumexp2(logcomp(x, 0), logcomp(x, 1));
  };
  t.gradient = [comps, logcomp](std::span<const double> x, std::span<double> g) {
    const double l0 = logcomp(x, 0), l1 = logcomp(x, 1);
    const double m = l0 > l1 ? l0 : l1;
    const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
    const double r0 = e0 / (e0 + e1), r1 = e1 / (e0 + e1);
    g[0] = 0.0;
    g[1] = 0.0;
    const double resp[2] = {r0, r1};
    for (int k = 0; k < 2; ++k) {
      const Comp& c = comps[k];
      const double dx = x[0] - c.mx, dy = x[1] - c.my;
      g[0] += resp[k] * (c.i00 * dx + c.i01 * dy);
      g[1] += resp[k] * (c.i01 * dx + c.i11 * dy);
    }
  };
  return t;
}

TargetModel make_ou(double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("ou: lambda must be positive");
  TargetModel t;
  t.name = "ou";
  t.dim = 1;
  t.recipe = ReferenceRecipe::gaussian_exact;
  t.ou_lambda = lambda;
  t.potential = [lambda](std::span<const double> x) { return 0.5 * lambda * x[0] * x[0]; };
  t.gradient = [lambda](std::span<const double> x, std::span<double> g) { g[0] = lambda * x[0]; };
  t.laplacian = [lambda](std::span<const double>) { return lambda; };
  t.drift_flow = [lambda](std::span<double> x, double h) { x[0] *= std::exp(-lambda * h); };
  return t;
}

TargetModel make_target_by_name(const std::string& name) {
  if (name == "quad-logcosh") return make_quadratic_logcosh(1.0, 0.8);
  if (name == "double-well") return make_double_well();
  if (name == "logistic") return make_logistic();
  if (name == "mog2d") return make_mixture_2d();
  if (name == "ou") return make_ou(1.0);
  throw std::invalid_argument("unknown target: " + name);
}

}  // namespace rsl
