#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tracknlu::detail {

/// Uniform integer in [0, n) from a 64-bit engine. Rejection sampling keeps it
/// unbiased and identical on every platform, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Mixes a string into a running 64-bit seed (FNV-1a over the bytes plus a
/// separator), so (seed, a, b, ...) keys an independent stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view part) {
  std::uint64_t h = seed ^ 0xcbf29ce484222325ULL;
  for (unsigned char c : part) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h ^= 0xff;
  h *= 0x100000001b3ULL;
  return h;
}

}  // namespace tracknlu::detail
