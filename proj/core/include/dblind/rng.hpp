#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace dblind {

/// Per-round random stream. The state is derived from (seed, round index)
/// alone, so any round can be regenerated independently of the others and of
/// the order in which rounds are simulated. The generator is SplitMix64,
/// which satisfies UniformRandomBitGenerator.
class RoundRng {
public:
  using result_type = std::uint64_t;

  RoundRng(std::uint64_t seed, std::uint64_t round_index) noexcept
      : state_(mix(seed ^ mix(round_index + 0x632be59bd9b4e019ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits. Implemented here rather
  /// than with std::uniform_real_distribution so streams are identical across
  /// standard library implementations.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool coin() noexcept { return ((*this)() >> 63) != 0; }

  /// Uniform index in [0, n). n must be non-zero.
  std::size_t index(std::size_t n) noexcept {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

} // namespace dblind
