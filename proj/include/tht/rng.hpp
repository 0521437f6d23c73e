#pragma once

#include <cstdint>
#include <random>

#include "tht/types.hpp"

namespace tht {

/// Seeded pseudo-random stream with value-stable uniform and normal draws.
///
/// The uniform and normal transforms are implemented here (rather than via
/// std::*_distribution) so that a given (seed, stream_index) pair produces the
/// same draw sequence on every standard library. Streams derived from the same
/// base seed but different indices are decorrelated by a splitmix64 finalizer
/// over the (seed, index) pair.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(mix(mix(seed) + kGolden)) {}

  static RngStream derive(std::uint64_t base_seed, std::uint64_t stream_index) {
    return RngStream(mix(base_seed + (stream_index + 1) * kGolden));
  }

  /// Uniform draw in [0, 1).
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, second value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log1p(-uniform01()));
    const double theta = 2.0 * kPi * uniform01();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  Vec standard_normal(Index n) {
    Vec z(n);
    for (Index i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tht
