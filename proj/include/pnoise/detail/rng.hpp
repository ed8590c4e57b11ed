#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pnoise::detail {

/// SplitMix64 finalizer (Steele, Lea & Flood 2014). Used only to derive
/// independent sub-seeds; the mapping is part of the stream contract and
/// must not change between versions.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Sub-seed for component `index` of a stream seeded with `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// Deterministic standard-normal source.
///
/// Uniforms come from std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. They are mapped to (0,1) with 53 random mantissa bits and
/// turned into normals with Marsaglia's polar method; the second variate of
/// each accepted pair is cached. std::normal_distribution is avoided because
/// its algorithm is implementation-defined.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double uniform() noexcept {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t bits() noexcept { return engine_(); }

    double operator()() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double v1 = 0.0;
        double v2 = 0.0;
        double s = 0.0;
        do {
            v1 = 2.0 * uniform() - 1.0;
            v2 = 2.0 * uniform() - 1.0;
            s = v1 * v1 + v2 * v2;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v2 * factor;
        has_spare_ = true;
        return v1 * factor;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace pnoise::detail
