#pragma once

#include <cstdint>
#include <random>

namespace accforge {

// Seed/derivation helpers. All randomness in the pipeline flows through
// mt19937_64 (its output sequence is fixed by the standard) plus the draw
// helpers below, so identical seeds reproduce identical bytes on any
// platform. std::uniform_*_distribution is implementation-defined and is
// deliberately not used.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-work-item seed derivation; lets parallel workers draw independent
// streams whose contents do not depend on scheduling order.
inline uint64_t derive_seed(uint64_t run_seed, uint64_t index) {
    return splitmix64(run_seed ^ splitmix64(index + 1));
}

// Unbiased draw in [0, n) via rejection sampling.
inline uint64_t draw_index(std::mt19937_64& rng, uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

// Draw in [lo, hi) with 53-bit resolution.
inline double draw_uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

}  // namespace accforge
