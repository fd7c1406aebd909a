#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

// Counter-based random streams. Every variate is a pure function of
// (seed, stream, step, slot), so trajectories are reproducible and
// independent of thread count and scheduling.

namespace rsl::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t seed_key(std::uint64_t seed) {
  return mix64(mix64(seed + kGolden) + 0x5851f42d4c957f2dULL);
}

// Counter packing: stream (particle / draw / pair index) gets bits 34..63,
// step bits 18..33, slot bits 0..17.
inline constexpr int kStepBits = 16;
inline constexpr int kSlotBits = 18;
inline constexpr std::uint64_t kMaxStream = (1ULL << 30) - 2;
inline constexpr std::uint64_t kSharedStream = (1ULL << 30) - 1;
inline constexpr std::uint64_t kMaxStep = (1ULL << kStepBits) - 1;
inline constexpr std::uint64_t kMaxSlot = (1ULL << kSlotBits) - 1;

inline constexpr std::uint64_t pack(std::uint64_t stream, std::uint64_t step,
                                    std::uint64_t slot) {
  return (stream << (kStepBits + kSlotBits)) | (step << kSlotBits) | slot;
}

inline constexpr std::uint64_t word(std::uint64_t key, std::uint64_t stream,
                                    std::uint64_t step, std::uint64_t slot) {
  return mix64(key + pack(stream, step, slot) * kGolden);
}

// Uniform on the open interval (0,1).
inline constexpr double to_u01(std::uint64_t w) {
  return (static_cast<double>(w >> 11) + 0.5) * 0x1p-53;
}

inline double uniform01(std::uint64_t key, std::uint64_t stream,
                        std::uint64_t step, std::uint64_t slot) {
  return to_u01(word(key, stream, step, slot));
}

// 256-layer ziggurat for the standard normal. Tables are solved
// numerically at startup (bisection on the base-layer abscissa), so there
// are no hard-coded table constants to get wrong.
class Ziggurat {
 public:
  static const Ziggurat& instance();

  // Consumes slots [slot0, slot0+2k) of the given (stream, step) counter
  // block, two per rejection attempt.
  double draw(std::uint64_t key, std::uint64_t stream, std::uint64_t step,
              std::uint64_t slot0) const {
    for (;;) {
      const std::uint64_t w1 = word(key, stream, step, slot0);
      const int j = static_cast<int>(w1 & 0xff);
      const double sign = (w1 & 0x100) ? -1.0 : 1.0;
      const double u1 = to_u01(w1);
      if (j == 0) {
        const double x = u1 * base_width_;
        if (x < r_) return sign * x;
        // Tail sample, x > r.
        const double xt = tail(key, stream, step, slot0 + 1);
        if (xt >= 0.0) return sign * xt;
      } else {
        const double x = u1 * x_[j - 1];
        if (x < x_[j]) return sign * x;
        const double u2 = uniform01(key, stream, step, slot0 + 1);
        const double yy = y_[j - 1] + u2 * (y_[j] - y_[j - 1]);
        if (yy < std::exp(-0.5 * x * x)) return sign * x;
      }
      slot0 += 2;
      if (slot0 > kMaxSlot) throw std::runtime_error("ziggurat: slot space exhausted");
    }
  }

  double r() const { return r_; }

 private:
  Ziggurat();
  double tail(std::uint64_t key, std::uint64_t stream, std::uint64_t step,
              std::uint64_t slot) const {
    // One Marsaglia tail attempt; caller retries on failure. The single
    // 64-bit word is split into two 32-bit uniforms, which truncates the
    // tail sample around r + 6.3 (mass beyond ~1e-23).
    const std::uint64_t w = word(key, stream, step, slot);
    const double u1 = (static_cast<double>(w >> 32) + 0.5) * 0x1p-32;
    const double u2 = (static_cast<double>(w & 0xffffffffULL) + 0.5) * 0x1p-32;
    const double xx = -std::log(u1) / r_;
    const double yy = -std::log(u2);
    if (2.0 * yy > xx * xx) return r_ + xx;
    return -1.0;
  }

  static constexpr int kLayers = 256;
  double x_[kLayers];  // x_[0] = r, decreasing
  double y_[kLayers];  // y_[i] = exp(-x_[i]^2/2), increasing
  double r_ = 0.0;
  double base_width_ = 0.0;  // v / f(r)
};

inline double normal(std::uint64_t key, std::uint64_t stream,
                     std::uint64_t step, std::uint64_t slot0) {
  return Ziggurat::instance().draw(key, stream, step, slot0);
}

}  // namespace rsl::rng
