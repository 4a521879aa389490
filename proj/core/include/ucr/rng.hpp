#pragma once

/** \file rng.hpp
 *  \brief Portable seeded randomness.
 *
 * std::mt19937_64 has a standardized output sequence, but the standard
 * distributions and std::shuffle do not. The helpers here map engine output to
 * ranges with fixed arithmetic so every platform draws the same values.
 */

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

namespace ucr {

/// Mixes a base seed with stream labels (splitmix64 finalizer per step).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t x = seed;
    for (std::uint64_t v : {a, b}) {
        x ^= v + 0x9e3779b97f4a7c15ULL + (x << 6) + (x >> 2);
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        x ^= x >> 31;
    }
    return x;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, n), unbiased by rejection. n must be ≥ 1.
    std::size_t index(std::size_t n) {
        const std::uint64_t range = n;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % range;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % range);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    bool bernoulli(double p) { return unit() < p; }

    /// Fisher–Yates.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ucr
