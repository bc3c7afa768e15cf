#pragma once

// Counter-based random numbers: every draw is a pure function of
// (key, stream, position), so Monte Carlo results do not depend on the order
// in which samples are evaluated or on the number of workers.

#include <cstdint>

namespace circlerds {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b + 0x632BE59BD9B4E019ull));
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(hash_combine(mix64(seed), stream)) {}

  constexpr std::uint64_t bits(std::uint64_t position) const { return mix64(key_ ^ mix64(position * 0xD1342543DE82EF95ull + 1)); }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t position) const {
    return static_cast<double>(bits(position) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace circlerds
