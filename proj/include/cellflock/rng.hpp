#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cellflock {

// Counter-based random number generation. Every draw is a pure hash of
// (seed, counter, cell, channel, lane), so streams are reproducible and
// independent of evaluation order or threading.

enum class RngChannel : std::uint64_t {
  init_position = 0,
  init_angle = 1,
  step_noise = 2,
};

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

}  // namespace detail

inline std::uint64_t rng_word(std::uint64_t seed, std::uint64_t counter,
                              std::uint64_t cell, RngChannel channel,
                              std::uint64_t lane = 0) {
  std::uint64_t h = detail::splitmix64(seed);
  h = detail::hash_combine(h, counter);
  h = detail::hash_combine(h, cell);
  h = detail::hash_combine(h, static_cast<std::uint64_t>(channel));
  h = detail::hash_combine(h, lane);
  return h;
}

// Uniform in [0, 1).
inline double rng_uniform(std::uint64_t seed, std::uint64_t counter,
                          std::uint64_t cell, RngChannel channel,
                          std::uint64_t lane = 0) {
  return static_cast<double>(rng_word(seed, counter, cell, channel, lane) >> 11) *
         0x1.0p-53;
}

// Standard normal via Box-Muller; lanes (2k, 2k+1) feed draw k.
inline double rng_normal(std::uint64_t seed, std::uint64_t counter,
                         std::uint64_t cell, RngChannel channel,
                         std::uint64_t lane = 0) {
  // u1 in (0, 1] so the log is finite.
  const double u1 =
      (static_cast<double>(rng_word(seed, counter, cell, channel, 2 * lane) >> 11) +
       1.0) *
      0x1.0p-53;
  const double u2 = rng_uniform(seed, counter, cell, channel, 2 * lane + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace cellflock
