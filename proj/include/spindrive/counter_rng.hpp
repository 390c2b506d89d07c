// counter_rng.hpp
// Deterministic counter-style random draws: every variate is a pure function
// of (seed, site index, channel). Site loops can therefore run in any order
// and across any number of threads without changing a single bit of output.

#pragma once

#include <cmath>
#include <cstdint>

namespace spindrive {

/// One SplitMix64 step: golden-gamma increment then the full-avalanche
/// finalizer. The increment keeps 0 from being a fixed point.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Keyed draw: 64 uniform bits from (seed, index, channel).
constexpr std::uint64_t keyed_bits(std::uint64_t seed, std::uint64_t index,
                                   std::uint64_t channel) noexcept {
    return mix64(mix64(mix64(seed) ^ index) ^ (channel ^ 0xd1b54a32d192ed03ULL));
}

/// Uniform double in [0, 1), 53 significant bits.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t index,
                            std::uint64_t channel) noexcept {
    return static_cast<double>(keyed_bits(seed, index, channel) >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller; consumes channels `channel` and `channel + 1`.
inline double keyed_normal(std::uint64_t seed, std::uint64_t index,
                           std::uint64_t channel) noexcept {
    // u1 in (0, 1] so the log is finite.
    const double u1 =
        static_cast<double>((keyed_bits(seed, index, channel) >> 11) + 1) * 0x1.0p-53;
    const double u2 = keyed_uniform(seed, index, channel + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Independent sub-seed for realization `stream` of a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    return mix64(base ^ (0x5851f42d4c957f2dULL * (stream + 1)));
}

// Channel assignments for lattice initialization. keyed_normal uses two
// consecutive channels, so the ids below are spaced accordingly.
namespace rng_channel {
inline constexpr std::uint64_t theta = 0;       // + 1 (Box-Muller pair)
inline constexpr std::uint64_t phi = 2;
inline constexpr std::uint64_t twin_theta = 3;  // + 1
inline constexpr std::uint64_t twin_phi = 5;    // + 1
inline constexpr std::uint64_t random_z = 7;
inline constexpr std::uint64_t random_phi = 8;
}  // namespace rng_channel

}  // namespace spindrive
