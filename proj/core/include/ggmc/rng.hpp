#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace ggmc {

// Counter-based 64-bit generator. The k-th raw word is a pure function of
// (seed, k), so streams can be reproduced from the seed alone in any
// language:
//
//   raw(k)     = mix(seed + (k+1) * 0x9E3779B97F4A7C15)   (wrapping arithmetic)
//   mix(z)     : z ^= z>>30; z *= 0xBF58476D1CE4E5B9;
//                z ^= z>>27; z *= 0x94D049BB133111EB; z ^= z>>31
//   uniform(k) = (raw(k) >> 11) * 2^-53                    in [0,1)
//   normal(i)  = sqrt(-2 ln u1) * cos(2 pi u2)
//                with u1 = max(uniform(2i), 2^-53), u2 = uniform(2i+1)
//
// mix is the splitmix64 finalizer. Each normal draw consumes exactly two
// counters; the Box-Muller sine branch is discarded to keep the stream
// layout independent of call history.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return raw(counter_++); }

  double uniform() { return to_unit(next_u64()); }

  double normal() {
    const std::uint64_t k = counter_;
    counter_ += 2;
    double u1 = to_unit(raw(k));
    const double u2 = to_unit(raw(k + 1));
    if (u1 <= 0.0) u1 = 0x1p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, bound) via modulo; bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t raw(std::uint64_t k) const {
    std::uint64_t z = seed_ + (k + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static double to_unit(std::uint64_t w) {
    return static_cast<double>(w >> 11) * 0x1p-53;
  }

  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace ggmc
