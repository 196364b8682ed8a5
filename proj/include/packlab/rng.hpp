#pragma once

// Seeded randomness for sampling. The generator is mt19937_64 whose
// output sequence is pinned by the C++ standard, so seeded runs are
// reproducible across platforms. Uniform draws are derived from raw
// 64-bit words directly (std distributions are not portable).

#include <cstdint>
#include <random>

#include "packlab/real.hpp"

namespace packlab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  static const char* name() { return "mt19937_64"; }

  std::uint64_t bits() { return gen_(); }

  bool coin() { return (bits() >> 63) != 0; }

  // uniform in [0, n)
  std::uint64_t index(std::uint64_t n) {
    // rejection sampling keeps the draw unbiased
    std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t v;
    do {
      v = bits();
    } while (v >= limit);
    return v % n;
  }

  // dyadic uniform in [0,1) with a 64-bit significand, exact as a Real
  Real real01(Prec prec) {
    Real k = Real::of_ulong(bits(), prec >= 64 ? prec : 64);
    return ldexp2(k, -64);
  }

  double double01() { return static_cast<double>(bits() >> 11) * 0x1p-53; }

 private:
  std::mt19937_64 gen_;
  std::uint64_t seed_;
};

}  // namespace packlab
