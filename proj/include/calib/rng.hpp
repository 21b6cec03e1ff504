#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace calib {

// All randomness flows through std::mt19937_64, whose output sequence is
// pinned bit-exactly by the standard. The distribution transforms below are
// written out instead of using std::*_distribution so that seeded runs
// reproduce across standard library implementations.

// 53-bit mantissa draw in [0, 1).
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased draw in [0, bound) by rejection. bound must be nonzero.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    std::uint64_t raw = rng();
    while (raw < threshold) raw = rng();
    return raw % bound;
}

// Standard normal via Box-Muller (cosine branch only; two uniforms per draw).
inline double standard_normal(std::mt19937_64& rng) {
    constexpr double two_pi = 6.283185307179586476925287;
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Fisher-Yates.
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace calib
