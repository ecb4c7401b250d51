#pragma once

#include <cmath>
#include <cstdint>

namespace pcd {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden64 = 0x9e3779b97f4a7c15ULL;

// Derive an independent stream key from a base seed and a tag. Chained
// derivation keys sub-streams per block / walker / estimator so results do
// not depend on scheduling.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) noexcept {
    return mix64(seed ^ mix64(tag + kGolden64));
}

template <class... Tags>
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, Tags... rest) noexcept {
    return derive(derive(seed, tag), rest...);
}

// Small counter-free PRNG (SplitMix64 sequence). All generation methods are
// fully specified, so identical seeds give identical output on every
// platform and build.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += kGolden64;
        return mix64(state_);
    }

    // Uniform double in [0, 1) with 53 random mantissa bits.
    double real01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return real01() < p; }

    // Uniform integer in [0, bound), bound >= 1. Rejection sampling keeps the
    // draw exactly uniform.
    std::uint32_t below(std::uint32_t bound) noexcept {
        const std::uint64_t b = bound;
        const std::uint64_t reject = (0ULL - b) % b;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= reject) return static_cast<std::uint32_t>(r % b);
        }
    }

    std::uint64_t below64(std::uint64_t bound) noexcept {
        const std::uint64_t reject = (0ULL - bound) % bound;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= reject) return r % bound;
        }
    }

  private:
    std::uint64_t state_;
};

// Gap to the next success of a Bernoulli(p) process, sampled by inverse CDF.
// log1mp must be std::log1p(-p) with p in (0, 1). Distributionally identical
// to counting failures of per-trial draws.
inline std::uint64_t geometric_skip(Rng& rng, double log1mp) noexcept {
    const double u = rng.real01();
    const double s = std::floor(std::log1p(-u) / log1mp);
    if (s >= 9.2e18) return UINT64_MAX;
    return static_cast<std::uint64_t>(s);
}

} // namespace pcd
