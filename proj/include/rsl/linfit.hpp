#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace rsl {

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;     // root-mean-square residual
  double slope_stderr = 0.0;
};

inline OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  OlsFit f;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / static_cast<double>(n));
  if (n > 2) f.slope_stderr = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
  return f;
}

}  // namespace rsl
