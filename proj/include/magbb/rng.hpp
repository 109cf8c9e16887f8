// Deterministic random streams for Monte Carlo runs. Each sample owns a
// stream derived from (seed, sample index), so results do not depend on
// evaluation order or thread count. SplitMix64 core; the bit sequence is a
// stability contract relied on by frozen regression values.
#pragma once

#include "magbb/types.hpp"

#include <cstdint>
#include <utility>

namespace magbb {

class RandomStream {
public:
    explicit RandomStream(std::uint64_t state) : state_(state) {}

    /// Stream for one Monte Carlo sample, decorrelated from neighbours by
    /// feeding the index through the finalizer before mixing with the seed.
    static RandomStream for_sample(std::uint64_t seed, std::uint64_t index) {
        return RandomStream(mix(seed ^ mix(index + 0x9E3779B97F4A7C15ULL)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return finalize(state_);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a logarithm argument.
    double next_unit_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Pair of independent standard normals (Box-Muller).
    std::pair<double, double> next_normal_pair() {
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    double next_normal() { return next_normal_pair().first; }

    /// Uniform direction on the unit sphere. Always consumes exactly two
    /// normal pairs so downstream draws stay aligned across samples.
    Vec3d next_unit_vector3() {
        const auto [n0, n1] = next_normal_pair();
        const auto [n2, n3] = next_normal_pair();
        (void)n3;
        Vec3d v(n0, n1, n2);
        const double n = v.norm();
        if (n < 1e-12) return Vec3d(0.0, 0.0, 1.0);
        return v / n;
    }

private:
    static std::uint64_t finalize(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    static std::uint64_t mix(std::uint64_t z) { return finalize(z + 0x9E3779B97F4A7C15ULL); }

    std::uint64_t state_;
};

}  // namespace magbb
