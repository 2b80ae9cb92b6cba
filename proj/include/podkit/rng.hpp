#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace podkit {

// Deterministic randomness helpers. std::uniform_int_distribution and
// std::shuffle are implementation-defined, so reproducible outputs
// (split files, sampled predictions) go through these instead.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Collapse (seed, a, b) into one well-mixed stream seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

/// Uniform draw in [0, n) by rejection; n must be > 0.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

/// Fisher-Yates with bounded(); same permutation on every platform.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[bounded(rng, i)]);
}

inline bool coin_flip(std::mt19937_64& rng) { return (rng() & 1u) != 0; }

} // namespace podkit
