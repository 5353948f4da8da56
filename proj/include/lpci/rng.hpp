#pragma once

#include <cmath>
#include <cstdint>

namespace lpci {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer; bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

/// Order-sensitive combine used to derive trial/child seeds.
inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ (mix64(v) + kGoldenGamma + (h << 6) + (h >> 2)));
}

/// Deterministic counter-based generator (SplitMix64 stream).
///
/// Identical seeds give identical streams on every run of the same build.
/// Child generators are derived by hashing (seed, index), so distinct indices
/// give independent streams regardless of how much the parent has advanced.
/// Instances are single-owner; concurrent callers should each derive a child.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept
      : seed_(seed), state_(mix64(seed ^ kGoldenGamma)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, second deviate cached).
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    // log1p(-u1) = log(1 - u1); u1 < 1 so the argument stays in (0, 1].
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Integer in [0, bound) (bound > 0). Modulo bias is negligible for the
  /// bounds used here (all far below 2^32).
  std::uint64_t below(std::uint64_t bound) noexcept { return next_u64() % bound; }

  Rng child(std::uint64_t index) const noexcept {
    return Rng(hash_combine(seed_, index));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lpci
