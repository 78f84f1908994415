#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mortgp {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-task RNG streams are derived from (master seed, string key, attempt) so
// that parallel scheduling order can never change results.
inline uint64_t derive_seed(uint64_t master, std::string_view key, uint64_t attempt = 0) {
  uint64_t h = splitmix64(master);
  h = splitmix64(h ^ fnv1a64(key));
  h = splitmix64(h ^ attempt);
  return h;
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace mortgp
