#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace llpq {

// splitmix64 finalizer; used for mixing seeds into independent streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t s) {
    return mix64(s);
}

// Chains an arbitrary number of keys into one stream seed, e.g.
// derive_seed(base, purpose, epoch, iter). Order-sensitive by design.
template <class... Rest>
std::uint64_t derive_seed(std::uint64_t s, std::uint64_t key, Rest... rest) {
    return derive_seed(mix64(s ^ mix64(key + 0x9e3779b97f4a7c15ULL)), rest...);
}

// Stream purposes, kept as integer tags so derivations never depend on
// string hashing.
namespace rng_purpose {
inline constexpr std::uint64_t sample = 1;
inline constexpr std::uint64_t rater1 = 2;
inline constexpr std::uint64_t rater2 = 3;
inline constexpr std::uint64_t grade_draw = 4;
inline constexpr std::uint64_t init = 5;
inline constexpr std::uint64_t batch = 6;
inline constexpr std::uint64_t augment = 7;
inline constexpr std::uint64_t split = 8;
inline constexpr std::uint64_t bootstrap = 9;
inline constexpr std::uint64_t pattern_draw = 10;
} // namespace rng_purpose

// mt19937_64 is bit-identical everywhere; the distributions below are our
// own because the std:: ones are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // U[0,1) with 53 significant bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [lo, hi] via rejection sampling.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(engine_()); // full range
        const std::uint64_t limit = (0 - span) % span; // 2^64 mod span
        std::uint64_t r = engine_();
        while (r < limit) r = engine_();
        return lo + static_cast<std::int64_t>(r % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, second value discarded to keep call counts predictable.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace llpq
