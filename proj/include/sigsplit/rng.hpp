#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace sigsplit {

// splitmix64 finalizer, used to decorrelate stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent engine for (seed, stream). mt19937_64 output is fully
// specified by the standard, so runs reproduce across platforms.
inline std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64{mix64(mix64(seed) ^ mix64(stream + 0x100000001b3ULL))};
}

// The helpers below avoid std distributions, whose exact output is
// implementation-defined and would break byte-identical reruns.

inline bool uniform_bit(std::mt19937_64& g) { return (g() >> 63) != 0; }

// Uniform double in [0, 1) with 53-bit resolution.
inline double uniform_unit(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n), n >= 1, by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t skew = (max % n + 1) % n;  // 2^64 mod n
    for (;;) {
        const std::uint64_t r = g();
        if (skew == 0 || r <= max - skew) return r % n;
    }
}

}  // namespace sigsplit
