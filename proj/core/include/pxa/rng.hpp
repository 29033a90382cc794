#pragma once

#include <cstdint>

namespace pxa {

/// Counter-based generator: the i-th draw is a pure function of (seed, i), so
/// streams are reproducible across platforms and independent of threading.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    std::uint64_t next() noexcept { return mix(seed_ ^ mix(counter_++ + 0x9e3779b97f4a7c15ULL)); }

    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept {
        // Rejection keeps the draw unbiased.
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % bound;
    }

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace pxa
