#pragma once

#include <cmath>
#include <cstdint>

namespace mfk {

// Counter-based random streams: every draw is a pure function of
// (seed, stream, step), so per-particle streams can be permuted or replayed
// without touching any shared state.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ splitmix64(stream ^ 0x6a09e667f3bcc908ULL));
  x = splitmix64(x ^ splitmix64(step ^ 0xbb67ae8584caa73bULL));
  return x;
}

/// Uniform draw in [0, 1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  return static_cast<double>(counter_bits(seed, stream, step) >> 11) * 0x1.0p-53;
}

/// Standard normal draw via Box-Muller on two sub-draws of the same counter.
inline double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  const std::uint64_t b1 = counter_bits(seed, stream, 2 * step);
  const std::uint64_t b2 = counter_bits(seed, stream, 2 * step + 1);
  const double u1 = (static_cast<double>(b1 >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(b2 >> 11) * 0x1.0p-53;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace mfk
