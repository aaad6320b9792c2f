#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace treemst {

/// mt19937_64 is fully specified by the standard, so engine output is reproducible
/// across platforms. Only the raw engine is used; std distributions are avoided
/// because their output is implementation-defined.
using SimRng = std::mt19937_64;

inline SimRng seeded_rng(std::uint64_t seed) { return SimRng{seed}; }

/// splitmix64 step; used to derive independent child seeds from (seed, salt) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform draw from [0, bound) by rejection; bound must be > 0.
inline std::uint64_t uniform_below(SimRng& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t x = rng();
        if (x >= threshold) return x % bound;
    }
}

inline std::int64_t uniform_int(SimRng& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline bool coin_flip(SimRng& rng) { return (rng() & 1u) != 0; }

template <class T>
void shuffle_in_place(std::vector<T>& v, SimRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_below(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace treemst
