#pragma once

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cstdint>

namespace cfsim {

// Purpose tags for independent random streams. Each purpose draws from its
// own generator so toggling one feature never shifts another's draws.
enum class Stream : std::uint64_t {
  kUserPositions = 1,
  kShadowing = 2,
  kFading = 3,
  kTest = 99,
};

// SplitMix64 finalizer; used only to derive well-separated seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream purpose,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(purpose)) ^ index);
}

// Boost samplers produce identical streams on every standard library.
using Rng = boost::random::mt19937_64;
using NormalDist = boost::random::normal_distribution<double>;
using UniformDist = boost::random::uniform_real_distribution<double>;

inline Rng make_rng(std::uint64_t seed, Stream purpose, std::uint64_t index = 0) {
  return Rng{derive_seed(seed, purpose, index)};
}

}  // namespace cfsim
