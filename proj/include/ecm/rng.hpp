#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace ecm {

// Seeding helpers. std::mt19937_64 is fully specified by the standard, but the
// standard distributions are not, so the draws below are hand-rolled to keep
// seeded results stable across standard library versions.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

// Unbiased integer in [0, n) via mask rejection.
inline uint64_t bounded(std::mt19937_64& eng, uint64_t n) {
  if (n <= 1) return 0;
  uint64_t mask = ~uint64_t{0} >> __builtin_clzll((n - 1) | 1);
  for (;;) {
    uint64_t v = eng() & mask;
    if (v < n) return v;
  }
}

}  // namespace ecm
