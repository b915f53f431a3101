#pragma once

#include <cstdint>
#include <random>

namespace kinlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for task `index` of a run seeded with `seed`.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t index = 0) {
  return Rng(stream_seed(seed, index));
}

// Uniform in [a, b) from a raw 64-bit hash, used for order-independent fields.
inline double hash_uniform(std::uint64_t h, double a, double b) {
  return a + (b - a) * static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

}  // namespace kinlab
