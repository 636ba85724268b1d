#pragma once

#include <cmath>
#include <cstdint>
#include <random>

// Sampling helpers with pinned bit-level behavior. std::uniform_real_distribution
// and friends are implementation-defined, so fixtures generated through them would
// not reproduce across standard libraries; everything here is spelled out on top
// of mt19937_64, whose output sequence the standard does pin.
namespace pathattr::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from (seed, stream id).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= stream;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x9E3779B97F4A7C15ull);
}

/// Uniform double in [0, 1), 53 random bits.
inline double uniform(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform(g);
}

/// Uniform integer in [lo, hi], both inclusive. Masked rejection, no modulo bias.
inline std::int64_t uniform_int(std::mt19937_64& g, std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(g());  // full 64-bit span
    std::uint64_t mask = range - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t v;
    do {
        v = g() & mask;
    } while (v >= range);
    return lo + static_cast<std::int64_t>(v);
}

/// Standard normal via Box-Muller. No cached second value, so the draw count
/// per call is fixed at two.
inline double gaussian(std::mt19937_64& g) {
    const double u1 = uniform(g);  // in [0,1); 1-u1 is in (0,1], safe for log
    const double u2 = uniform(g);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace pathattr::rng
