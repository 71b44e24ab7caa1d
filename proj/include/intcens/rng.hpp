#pragma once

// Reproducible random streams. Every replication or path draws from its own
// std::mt19937_64 whose seed is splitmix64 applied to (master seed, stream).

#include <cstdint>
#include <random>

namespace intcens {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) { return Rng(stream_seed(master, stream)); }

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace intcens
