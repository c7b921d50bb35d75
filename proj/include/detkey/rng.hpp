#pragma once

#include <cstdint>

// Counter-based generator: every random quantity is a pure function of
// (seed, purpose lane, round, index), so parallel and out-of-order
// generation produce identical streams.

namespace detkey::rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_word(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
}

inline int counter_bit(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c) {
  return static_cast<int>(counter_word(seed, a, b, c) & 1u);
}

// uniform in [0,1) from the top 53 bits
inline double counter_u01(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  return static_cast<double>(counter_word(seed, a, b, c) >> 11) * 0x1p-53;
}

}  // namespace detkey::rng
