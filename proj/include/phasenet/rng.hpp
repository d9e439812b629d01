#pragma once

#include <cstdint>
#include <random>

namespace phasenet {

// splitmix64 step; used to derive independent seeds from (seed, index) pairs.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic RNG. mt19937_64 has a standard-pinned sequence, and the
// mappings below avoid std::uniform_*_distribution, whose output is
// implementation-defined, so streams are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Strictly inside (0, 1): (x + 0.5) / 2^53 with x in [0, 2^53).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Strictly inside (lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Unbiased draw from [0, n), n >= 1 (rejection on the wrap-around range).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace phasenet
