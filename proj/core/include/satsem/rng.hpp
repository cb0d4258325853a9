// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "satsem/common.hpp"

namespace satsem {

// Deterministic random source. All distributions are implemented explicitly
// (uniform via 53-bit mantissa, normal via Box-Muller) so that streams do not
// depend on the standard library's distribution internals. Fixed seeds
// therefore reproduce every draw bit-exactly on a given platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0)
        : seed_(seed ? seed : 0x9e3779b97f4a7c15ULL), eng_(seed_) {}

    std::uint64_t seed() const { return seed_; }

    // Independent child stream keyed on (seed, stream_id); splitmix64 mixing
    // decorrelates nearby ids. Does not consume state from the parent.
    Rng split(std::uint64_t stream_id) const {
        std::uint64_t z = seed_ + (stream_id + 1) * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return Rng(z ? z : 1);
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) { return eng_() % n; }

    // Standard normal via Box-Muller; caches the second deviate.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // CN(0, var): circularly symmetric complex normal.
    cplx complex_normal(double var = 1.0) {
        const double s = std::sqrt(var / 2.0);
        return {s * normal(), s * normal()};
    }

    // Zero-mean Laplace with scale b (inverse-CDF sampling).
    double laplace(double scale) {
        const double u = uniform() - 0.5;
        const double s = (u < 0.0) ? -1.0 : 1.0;
        return -scale * s * std::log(1.0 - 2.0 * std::abs(u));
    }

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            std::swap(first[i - 1], first[uniform_index(i)]);
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace satsem
