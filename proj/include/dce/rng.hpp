#pragma once

// Counter-based randomness. Every random quantity in the library is a pure
// function of (key, index, lane), where keys are derived from a master seed
// plus an operation tag and a trial index. Evaluating a stream out of order,
// or from several threads, yields the same values as a serial pass.

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace dce {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a, used to turn operation names into stream tags at compile time.
constexpr std::uint64_t tag_of(std::string_view name) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Substream key for (master seed, operation tag, index).
constexpr std::uint64_t derive_key(std::uint64_t master, std::uint64_t tag,
                                   std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(master ^ 0x6A09E667F3BCC909ULL) ^ tag) + index * kGolden);
}

/// 53-bit uniform strictly inside (0, 1).
constexpr double u01(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal quantile. Monotone in u, so argmax over u is argmax over the normal.
inline double normal_quantile(double u) {
  // erfc_inv(2u) loses no precision near u -> 1 because 2u is exact and boost
  // reflects arguments above 1 internally.
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Random-access view of one SplitMix64 stream: bits(i) is the (i+1)-th output
/// of a SplitMix64 generator seeded with `key`.
class CounterStream {
 public:
  constexpr CounterStream() = default;
  constexpr explicit CounterStream(std::uint64_t key) : key_(key) {}

  constexpr std::uint64_t bits(std::uint64_t i) const noexcept {
    return mix64(key_ + (i + 1) * kGolden);
  }
  constexpr double uniform(std::uint64_t i) const noexcept { return u01(bits(i)); }
  double normal(std::uint64_t i) const { return normal_quantile(uniform(i)); }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_ = 0;
};

/// Sequential SplitMix64; models std::uniform_random_bit_generator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  double uniform() noexcept { return u01((*this)()); }
  double normal() { return normal_quantile(uniform()); }

  /// Uniform integer in [0, n) by multiply-high (Lemire); n >= 1.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace dce
