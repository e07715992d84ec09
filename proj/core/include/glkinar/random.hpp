#pragma once

#include <cstdint>
#include <random>

namespace glkinar {

/// The project-wide random stream. Seeded explicitly everywhere; no global state.
using Rng = std::mt19937_64;

/// Uniform draw on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Derives an independent stream seed from a master seed and a stream index
/// (splitmix64 finalizer), so parallel chains never share a sequence.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace glkinar
