#pragma once
// Deterministic random number generation.
//
// Reproducibility contract: the engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard, and every distribution below is
// implemented here rather than taken from <random>, because the standard
// library's distributions are not bit-portable across implementations.
// Given the same seed, any Rng produces the same draws on every platform.
//
// Stream splitting: substream seeds are derived with mix_seed(), a
// splitmix64-style finalizer keyed by a stream id. Independent parts of a
// computation (worker draw, truth draw, label draw, per-trial streams)
// each get their own derived seed, so changing how much one stream
// consumes never perturbs another.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace crowdsel {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a substream seed from a parent seed and a stream id.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
    return mix_seed(mix_seed(seed, a, b), c);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1), 53 random mantissa bits.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Mask-and-reject, exactly uniform.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("next_below: n must be positive");
        if (n == 1) return 0;
        std::uint64_t mask = ~std::uint64_t{0} >> countl_zero_(n - 1);
        std::uint64_t v;
        do {
            v = engine_() & mask;
        } while (v >= n);
        return v;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via Marsaglia's polar method.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

    // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
    double next_gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("next_gamma: shape must be positive");
        if (shape < 1.0) {
            double u = next_double();
            while (u == 0.0) u = next_double();
            return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_double();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Beta(a, b) as Ga/(Ga+Gb); result kept strictly inside (0, 1).
    double next_beta(double a, double b) {
        const double ga = next_gamma(a);
        const double gb = next_gamma(b);
        double r = (ga + gb > 0.0) ? ga / (ga + gb) : 0.5;
        if (r <= 0.0) r = std::numeric_limits<double>::min();
        if (r >= 1.0) r = 1.0 - std::numeric_limits<double>::epsilon() / 2;
        return r;
    }

    // First k entries of a uniform random permutation of {1, ..., m}.
    std::vector<int> sample_without_replacement(int m, int k) {
        if (k > m) throw std::invalid_argument("sample_without_replacement: k > m");
        std::vector<int> pool(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) pool[static_cast<std::size_t>(i)] = i + 1;
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(next_below(static_cast<std::uint64_t>(m - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        }
        pool.resize(static_cast<std::size_t>(k));
        return pool;
    }

private:
    static int countl_zero_(std::uint64_t x) {
        int n = 0;
        for (std::uint64_t bit = std::uint64_t{1} << 63; bit != 0 && !(x & bit); bit >>= 1) ++n;
        return n;
    }

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace crowdsel
