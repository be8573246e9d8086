#pragma once

#include <cstdint>

// Philox4x32-10 counter-based generator (Salmon et al., Random123 constants).
// A block is keyed by (key0, key1) and a 128-bit counter; outputs 4x u32.

namespace wkam::simd {

namespace philox {
inline constexpr std::uint32_t M0 = 0xD2511F53u;
inline constexpr std::uint32_t M1 = 0xCD9E8D57u;
inline constexpr std::uint32_t W0 = 0x9E3779B9u;
inline constexpr std::uint32_t W1 = 0xBB67AE85u;
}  // namespace philox

inline void philox4x32(const std::uint32_t ctr_in[4], const std::uint32_t key_in[2],
                       std::uint32_t out[4]) {
  std::uint32_t c0 = ctr_in[0], c1 = ctr_in[1], c2 = ctr_in[2], c3 = ctr_in[3];
  std::uint32_t k0 = key_in[0], k1 = key_in[1];
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(philox::M0) * c0;
    std::uint64_t p1 = static_cast<std::uint64_t>(philox::M1) * c2;
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    if (round < 9) {
      k0 += philox::W0;
      k1 += philox::W1;
    }
  }
  out[0] = c0;
  out[1] = c1;
  out[2] = c2;
  out[3] = c3;
}

}  // namespace wkam::simd
