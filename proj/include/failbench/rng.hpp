#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace failbench {

// Stable seed derivation. Reported results must be bit-identical across runs
// and worker counts, so every random decision draws from a seed derived here
// instead of a shared engine. splitmix64 is the mixing function; strings are
// folded in with FNV-1a. Changing this changes every seeded artifact.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return splitmix64(seed ^ splitmix64(salt));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : salt) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix_seed(seed, h);
}

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt, Rest... rest) {
    return mix_seed(mix_seed(seed, salt), rest...);
}

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt, Rest... rest) {
    return mix_seed(mix_seed(seed, salt), rest...);
}

// mt19937_64 output is pinned by the standard; the distributions are not.
// These helpers replace std::uniform_*_distribution so draws are identical
// on any implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection-free modulo bias is negligible for
    // the ranges used here (n << 2^64), but do the standard rejection anyway.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    // Standard normal via Box-Muller (deterministic, no cached spare).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_index(i))]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace failbench
