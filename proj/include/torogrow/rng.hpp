#pragma once

#include <cstdint>

namespace torogrow {

// splitmix64; self-contained so seeded runs are reproducible across platforms
// and standard library versions.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [lo, hi] inclusive
    long long int_range(long long lo, long long hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<long long>(next_u64() % span);
    }
};

}  // namespace torogrow
