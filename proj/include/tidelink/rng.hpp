#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tidelink::rng {

/// splitmix64 finalizer. Used as a pure mixing function so draws are a
/// function of (seed, stream, index) alone: no sequential generator state,
/// which keeps every sample reproducible no matter which subset of noise
/// processes is enabled.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// (0, 1], never zero, safe under log().
inline double unit_open(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// [0, 1).
inline double unit_half_open(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Standard normal draw addressed by (seed, stream, index), Box-Muller.
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed ^ splitmix64(stream));
    h = splitmix64(h ^ index);
    const std::uint64_t a = splitmix64(h);
    const std::uint64_t b = splitmix64(a ^ 0x6A09E667F3BCC909ULL);
    const double r = std::sqrt(-2.0 * std::log(unit_open(a)));
    return r * std::cos(2.0 * std::numbers::pi * unit_half_open(b));
}

} // namespace tidelink::rng
