#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace eolgp {

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: draw k is mix64(seed + (k + 1) * golden_gamma).
/// The same (seed, counter) always yields the same value on every platform.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  [[nodiscard]] constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
    return mix64(seed_ + (counter + 1) * kGamma);
  }
  constexpr std::uint64_t next() noexcept { return at(counter_++); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one value per two draws).
  double normal() noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates: for i = n-1 down to 1, swap i with floor(u * (i + 1)).
[[nodiscard]] std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace eolgp
