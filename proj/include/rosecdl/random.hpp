#pragma once

#include <cstdint>
#include <random>

namespace rosecdl {

using Rng = std::mt19937_64;

// Named streams so that independent consumers of one top-level seed never
// share a generator.
enum class Stream : std::uint64_t {
  Dictionary = 1,
  Activations = 2,
  Noise = 3,
  Artifacts = 4,
  RareAtoms = 5,
  Init = 10,
  Windows = 11,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for (seed, stream, index): mix64(mix64(seed ^ mix64(stream)) + index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(stream))) + index);
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace rosecdl
