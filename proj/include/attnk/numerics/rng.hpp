#pragma once

#include <cmath>
#include <cstdint>

namespace attnk {

/// Deterministic stream of standard-normal draws.
///
/// Generator: splitmix64 in counter mode (the i-th 64-bit word is the
/// splitmix64 finalizer applied to seed + i * 0x9E3779B97F4A7C15), mapped to
/// (0,1) uniforms via the top 53 bits, then paired through Box-Muller.
/// The algorithm is fully specified here so other-language ports can
/// reproduce the sequence bit for bit on IEEE-754 doubles.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : seed_(seed) {}

  /// Next standard-normal draw.
  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_u01();
    const double u2 = next_u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Next uniform draw in (0,1).
  double next_u01() {
    const std::uint64_t bits = next_u64() >> 11;  // 53 random bits
    // (bits + 0.5) * 2^-53 lies strictly inside (0,1); log() above is safe.
    return (static_cast<double>(bits) + 0.5) * 0x1p-53;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace attnk
