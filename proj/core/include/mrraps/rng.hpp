#pragma once

#include <cstdint>
#include <random>

namespace mrraps::rng {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `index` derived from `master`.
///
/// Counter based: the result depends only on (master, index), so replications
/// can be generated in any order or on any worker and still see the same data.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master + 0x9e3779b97f4a7c15ULL) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

inline Engine make_engine(std::uint64_t master, std::uint64_t index) {
  return Engine(stream_seed(master, index));
}

}  // namespace mrraps::rng
