#pragma once

#include <cmath>
#include <cstdint>

namespace dsrc {

// Counter-based random numbers. Every draw is a pure function of
// (seed, path, step, component), so parallel and serial sweeps produce
// bit-identical streams and any single increment can be regenerated
// without replaying the sequence.

/// SplitMix64 finalizer; full-period 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Keyed hash of a (seed, a, b, c) counter tuple.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

/// Uniform draw in the open interval (0, 1).
inline double uniform01(std::uint64_t bits) {
    // 53 mantissa bits; offset by half an ulp so 0 is never returned.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw for counter (seed, path, step, component).
/// Box-Muller on two independent counter hashes.
inline double normal_draw(std::uint64_t seed, std::uint64_t path,
                          std::uint64_t step, std::uint64_t component) {
    const double u1 = uniform01(counter_hash(seed, path, step, 2 * component));
    const double u2 = uniform01(counter_hash(seed, path, step, 2 * component + 1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Deterministic stream of uniforms for test/probe generators that do not
/// need counter addressing. Stateful but reproducible from the seed.
class SequenceRng {
public:
    explicit SequenceRng(std::uint64_t seed) : state_(mix64(seed)) {}

    std::uint64_t next_bits() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    double uniform() { return uniform01(next_bits()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) { return next_bits() % n; }

private:
    std::uint64_t state_;
};

} // namespace dsrc
