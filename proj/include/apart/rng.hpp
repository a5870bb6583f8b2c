#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace apart {

using Rng = std::mt19937_64;

// Independent generator for a named component ("latent", "policy", ...)
// derived from one master seed. Streams never share state, so switching a
// feature on or off leaves the other streams untouched.
inline Rng make_stream(std::uint64_t master_seed, std::string_view label) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline int uniform_int(Rng& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

}  // namespace apart
