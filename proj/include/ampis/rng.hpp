#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random number generation. Every variate is a pure function of
// a root seed and a small tuple of stream indices, so draws are reproducible
// across platforms, thread counts, and iteration orders.
//
// The mixer is the splitmix64 finalizer. Uniform doubles take the top 53 bits
// of the mixed word; Laplace variates use the inverse-CDF transform
//   x = -b * sgn(u) * log(1 - 2|u|),  u uniform on (-1/2, 1/2),
// evaluated bit-exactly from the same stream.

namespace ampis::rng {

constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a) {
    return mix64(mix64(seed) ^ a);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix64(key(seed, a) ^ b);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) {
    return mix64(key(seed, a, b) ^ c);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c, std::uint64_t d) {
    return mix64(key(seed, a, b, c) ^ d);
}

/// Uniform double in [0, 1) from a fully mixed word.
inline double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Uniform double in the open interval (0, 1).
inline double to_unit_open(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Zero-mean Laplace variate with the given scale.
inline double laplace(double scale, std::uint64_t h) {
    const double u = to_unit_open(h) - 0.5;  // (-1/2, 1/2)
    const double s = u < 0.0 ? -1.0 : 1.0;
    return -scale * s * std::log(1.0 - 2.0 * std::abs(u));
}

}  // namespace ampis::rng
