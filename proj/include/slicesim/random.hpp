#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace slicesim {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent streams from (seed, index...)
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = mix_seed(seed);
  for (auto p : parts) h = mix_seed(h ^ mix_seed(p));
  return h;
}

}  // namespace slicesim
