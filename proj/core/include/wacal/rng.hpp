#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace wacal {

/// Seedable generator with a fixed stream layout: uniforms come straight
/// from mt19937_64 (53-bit mantissa), every normal draw consumes exactly
/// two uniforms (Box-Muller, cosine branch). Cross-language ports that
/// adopt the same generator can match streams draw for draw.
class Rng {
 public:
  static constexpr const char* kGeneratorId = "mt19937_64/box-muller/v1";

  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(uniform() * n) % n;
  }

  /// Standard normal; consumes two uniforms.
  double normal() {
    const double u1 = 1.0 - uniform();  // avoid log(0)
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace wacal
