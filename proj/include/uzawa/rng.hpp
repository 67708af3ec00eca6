#pragma once

#include <cstdint>
#include <random>

namespace uzawa {

/// Seeded generator used everywhere randomness is needed. Doubles are built
/// from the top 53 bits of one mt19937_64 draw, so streams are identical
/// across standard libraries (std::uniform_real_distribution is not).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

private:
  std::mt19937_64 gen_;
};

}  // namespace uzawa
