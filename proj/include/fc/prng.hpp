#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>

namespace fc {

/// Deterministic 64-bit PRNG ("splitmix64-v1").
///
/// This is the splitmix64 finalizer (Steele, Lea & Flood 2014): a 64-bit
/// counter advanced by the golden-ratio increment and scrambled by two
/// xorshift-multiply rounds. It is tiny, fast, and fully specified right
/// here, so anything seeded with it — dataset splits in particular — can be
/// reproduced bit-for-bit in any language without chasing library internals.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr const char* version() { return "splitmix64-v1"; }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) built from the top 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), rejection-sampled so there is no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("SplitMix64::below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % n;
    }

    /// Standard normal via Box–Muller; the second sample of each pair is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    /// In-place Fisher–Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Independent sub-stream for a named purpose. Hashing (state, tag) through
    /// one scramble round keeps streams decorrelated yet reproducible from the
    /// (seed, tag) pair alone.
    SplitMix64 fork(std::uint64_t tag) const {
        SplitMix64 g(state_ ^ (0xA0761D6478BD642Full * (tag + 1)));
        g.next();
        return g;
    }

private:
    static constexpr double kPi = 3.141592653589793238462643383279502884;

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace fc
