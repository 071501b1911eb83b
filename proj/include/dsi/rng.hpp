#pragma once

#include <cstdint>
#include <random>

namespace dsi {

/// mt19937_64 plus a bounded draw whose output is fixed by the standard, unlike
/// std::uniform_int_distribution, so transcripts match across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    /// Uniform integer in [0, bound). `bound` must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        // reject the 2^64 mod bound lowest outputs so the modulo is unbiased
        const std::uint64_t threshold = (0 - bound) % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x < threshold);
        return x % bound;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace dsi
