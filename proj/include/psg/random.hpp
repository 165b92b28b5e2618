#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace psg {

// Portable seeded randomness. std::uniform_int_distribution and std::shuffle
// are implementation-defined, so draws are done by hand to keep generated
// games identical across standard libraries.

using Rng = std::mt19937_64;

/// Uniform integer in [0, n), n >= 1, by rejection sampling.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // mt19937_64 covers the full 64-bit range; reject the low 2^64 mod n values.
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

template <typename T>
void fisher_yates(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic sub-seed from a base seed, a name and a small integer tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view name, std::uint64_t tag) {
  return splitmix64(splitmix64(base ^ fnv1a(name)) + tag);
}

}  // namespace psg
