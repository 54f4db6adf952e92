#ifndef DRIPSIM_RNG_HPP
#define DRIPSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dripsim {

// Deterministic randomness stream. The engine is std::mt19937_64 (its output
// sequence is pinned by the standard); the derived draws below are defined
// here rather than taken from <random> distributions, whose algorithms are
// implementation-defined and would break cross-toolchain reproducibility.
//
// Draw accounting, so that consumers can be replayed exactly:
//   uniform01()      consumes 1 engine word
//   uniform_below(n) consumes 1 engine word
//   gaussian(sigma)  consumes 2 engine words (Box-Muller, no caching, no rejection)
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). Requires n > 0.
    std::uint32_t uniform_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(uniform01() * n);
    }

    /// Zero-mean gaussian with standard deviation sigma. Always consumes
    /// exactly two uniforms, even for sigma = 0.
    double gaussian(double sigma) {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        return sigma * r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace dripsim

#endif
