#pragma once

#include <cstddef>
#include <span>

namespace rsl {

// Fixed-order pairwise summation; the reduction tree depends only on the
// length, so results are identical regardless of thread count upstream.
inline double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

template <class F>
double pairwise_transform_sum(std::span<const double> v, F f) {
  const std::size_t n = v.size();
  if (n <= 16) {
    double s = 0.0;
    for (double x : v) s += f(x);
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_transform_sum(v.subspan(0, half), f) +
         pairwise_transform_sum(v.subspan(half), f);
}

}  // namespace rsl
