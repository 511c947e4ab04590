#pragma once

// Seed derivation helpers.  Stable mixing keeps per-problem rng streams
// independent of processing order and equal across phases.

#include <cstdint>
#include <string_view>

namespace featml::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return splitmix64(seed ^ splitmix64(salt));
}

// FNV-1a over the bytes, then mixed with the seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : salt) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return mix_seed(seed, h);
}

}  // namespace featml::detail
