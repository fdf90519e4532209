#pragma once

#include <cstdint>
#include <random>

namespace robustfair {

/// splitmix64 finalizer; used to derive independent per-sample seeds so
/// results do not depend on worker count or visit order.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b) ^ (0xd1b54a32d192ed03ULL + c));
}

/// Uniform double in [0, 1) built from the top 53 bits of the generator
/// output. Unlike std::uniform_real_distribution the sequence is identical
/// on every platform.
inline double uniform_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; consumes two generator outputs.
inline double normal_double(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform_double(rng);  // (0, 1]
  const double u2 = uniform_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace robustfair
