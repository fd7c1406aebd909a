#include "rsl/rng.hpp"

namespace rsl::rng {

namespace {

constexpr double kSqrtHalfPi = 1.2533141373155002512;  // sqrt(pi/2)

double gauss(double x) { return std::exp(-0.5 * x * x); }

// Gaussian upper-tail area (unnormalized density exp(-x^2/2)).
double tail_area(double r) { return kSqrtHalfPi * std::erfc(r / std::sqrt(2.0)); }

// Runs the layer recurrence for a candidate base abscissa r and returns
// y after the top layer; the correct r makes it close on f(0)=1.
double closure(double r, double* x, double* y, double* v_out) {
  const int n = 256;
  const double v = r * gauss(r) + tail_area(r);
  x[0] = r;
  y[0] = gauss(r);
  for (int i = 1; i < n; ++i) {
    const double yi = y[i - 1] + v / x[i - 1];
    if (yi >= 1.0) {
      // Layers collapsed early: v (hence the increment) too large, meaning
      // the candidate r is too small.
      return 2.0 + static_cast<double>(n - i);
    }
    y[i] = yi;
    x[i] = std::sqrt(-2.0 * std::log(yi));
  }
  *v_out = v;
  // Exact closure has the top slab reaching f(0) = 1.
  return y[n - 1];
}

}  // namespace

Ziggurat::Ziggurat() {
  double lo = 3.0, hi = 4.0, v = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double c = closure(mid, x_, y_, &v);
    // y after the top layer decreases in r; c > 1 means r was too small.
    if (c > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  // Rebuild from the safe side (y stays below 1 all the way up).
  closure(hi, x_, y_, &v);
  r_ = hi;
  base_width_ = v / gauss(r_);
}

const Ziggurat& Ziggurat::instance() {
  static const Ziggurat z;
  return z;
}

}  // namespace rsl::rng
