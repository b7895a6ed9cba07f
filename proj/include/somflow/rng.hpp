#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace somflow {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Combine a seed with stream identifiers into a derived seed.
inline constexpr std::uint64_t hash_stream(std::uint64_t seed, std::uint64_t a,
                                           std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

/// Deterministic RNG with an explicit seed. Uniform and normal variates are
/// generated from raw mt19937_64 output so the stream is identical across
/// platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent child stream; stable under reordering of fork calls.
    Rng fork(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
        return Rng(hash_stream(seed_, a, b, c));
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (cached spare).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::vector<double> normal_vec(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = normal();
        return v;
    }

    /// Uniform integer in [0, n).
    std::uint64_t integer(std::uint64_t n) { return gen_() % n; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace somflow
