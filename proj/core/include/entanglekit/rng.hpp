#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace entanglekit {

// Seeded randomness helpers.
//
// std::mt19937_64 produces a standardized sequence, but the standard library's
// *distributions* are implementation-defined.  Everything that feeds frozen
// expected values or golden files therefore goes through the explicit
// transforms below, so a seed pins the output bit-for-bit on any conforming
// standard library.

using rng_engine = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(rng_engine& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller.  Consumes exactly two engine values per
// call; no rejection, no hidden state.
inline double normal(rng_engine& gen) {
    double u1 = uniform_unit(gen);
    double u2 = uniform_unit(gen);
    // Guard the log: map 0 to the smallest representable positive offset.
    if (u1 <= 0.0)
        u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Uniform integer in [0, n) by masked rejection (unbiased, deterministic).
inline std::uint64_t uniform_index(rng_engine& gen, std::uint64_t n) {
    if (n <= 1)
        return 0;
    std::uint64_t mask = ~std::uint64_t{0};
    mask >>= __builtin_clzll(n - 1) ; // smallest all-ones mask covering n-1
    for (;;) {
        const std::uint64_t draw = gen() & mask;
        if (draw < n)
            return draw;
    }
}

} // namespace entanglekit
