#pragma once

#include <cstdint>

namespace gasm {

// 64-bit avalanche mix (splitmix64 finalizer). Seeded so routing and sketch
// hashing are reproducible across runs for a recorded seed.
inline std::uint64_t hash64(std::uint64_t x, std::uint64_t seed = 0) {
    x += 0x9e3779b97f4a7c15ULL + seed;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace gasm
