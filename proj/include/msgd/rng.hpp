#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "msgd/types.hpp"

namespace msgd {

/// splitmix64 finalizer, used to derive sub-stream seeds from (seed, stream id).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seedable random source with named sub-streams.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard, and all variate transforms below are written out explicitly
/// (no std::*_distribution, whose algorithms vary across standard
/// libraries). Given a seed, the generated bits are therefore identical
/// across toolchains; values that pass through libm (log, cos, lgamma)
/// are identical across runs on the same platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Independent generator for a named sub-stream of this seed.
    Rng stream(std::uint64_t id) const { return Rng(mix_seed(seed_, id)); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1), safe as a log() argument.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Unbiased integer in [0,n).
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    /// Standard normal via Box-Muller (two uniforms per draw).
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    /// Poisson variate; inversion for small rates, Hormann's PTRS rejection
    /// for large ones.
    std::int64_t poisson(double rate) {
        if (!(rate >= 0.0) || !std::isfinite(rate))
            throw std::invalid_argument("poisson: rate must be finite and nonnegative");
        if (rate == 0.0) return 0;
        if (rate < 10.0) return poisson_inversion(rate);
        return poisson_ptrs(rate);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::int64_t poisson_inversion(double rate) {
        const double l = std::exp(-rate);
        std::int64_t k = 0;
        double prod = uniform_open();
        while (prod > l) {
            prod *= uniform_open();
            ++k;
        }
        return k;
    }

    std::int64_t poisson_ptrs(double rate) {
        const double slam = std::sqrt(rate);
        const double loglam = std::log(rate);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        while (true) {
            const double u = uniform() - 0.5;
            const double v = uniform_open();
            const double us = 0.5 - std::abs(u);
            const double k = std::floor((2.0 * a / us + b) * u + rate + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
                k * loglam - rate - std::lgamma(k + 1.0)) {
                return static_cast<std::int64_t>(k);
            }
        }
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Sorted k-subset of [0,p), uniform over all such subsets (Floyd's method).
inline std::vector<int> sample_index_subset(Rng& rng, int p, int k) {
    if (k < 0 || k > p) throw std::invalid_argument("sample_index_subset: need 0 <= k <= p");
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    for (int j = p - k; j < p; ++j) {
        const int t = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(j) + 1));
        if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
            chosen.push_back(t);
        else
            chosen.push_back(j);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

/// Standard normal vector of length n.
inline Vec normal_vector(Rng& rng, Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

}  // namespace msgd
