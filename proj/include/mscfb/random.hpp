#pragma once

/// @file
/// SplitMix64 (Steele, Lea, Flood 2014): output k of a stream seeded with s
/// is mix(s + (k + 1) * 0x9E3779B97F4A7C15), so every draw is a pure
/// function of (seed, counter). Trial and dataset reproducibility depend on
/// this exact generator and the derived distributions below; changing any
/// of them requires bumping the report format version.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mscfb {

class SplitMix64 {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t next() noexcept {
        state_ += kGamma;
        return mix(state_);
    }

    /// Uniform in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) by rejection; n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; one normal per two uniforms.
    double normal() noexcept {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

/// Seed of the PRNG stream owned by trial `index`.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
    return master_seed ^ index;
}

} // namespace mscfb
