#pragma once

#include <cstdint>

namespace sklab {

// splitmix64: used for seed derivation and for light test/sampling streams.
// Unlike std:: distributions its output is identical on every platform.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in (0, 1)
    double unit() { return double(next() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

    // uniform in [a, b)
    double range(double a, double b) { return a + (b - a) * unit(); }
};

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    SplitMix64 m(a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2)));
    return m.next();
}

}  // namespace sklab
