#include "pcd/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace pcd {

Estimate wilson_estimate(std::uint64_t successes, std::uint64_t trials, double z) {
    if (trials == 0) throw std::invalid_argument("wilson: zero trials");
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2 * n)) / denom;
    const double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom;
    return {phat, std::max(0.0, center - half), std::min(1.0, center + half), trials};
}

PairSampler PairSampler::all_pairs(const Graph& g) {
    return PairSampler(Kind::all, g.node_count(), g.community_size(), {});
}

PairSampler PairSampler::intra(const Graph& g) {
    return PairSampler(Kind::intra, g.node_count(), g.community_size(), {});
}

PairSampler PairSampler::inter(const Graph& g) {
    return PairSampler(Kind::inter, g.node_count(), g.community_size(), {});
}

PairSampler PairSampler::among(std::vector<std::uint32_t> nodes) {
    return PairSampler(Kind::among, 0, 1, std::move(nodes));
}

std::uint64_t PairSampler::pair_count() const {
    const std::uint64_t n = n_;
    const std::uint64_t c = community_size_;
    switch (kind_) {
    case Kind::all: return n < 2 ? 0 : n * (n - 1);
    case Kind::intra: return n * (c - 1);
    case Kind::inter: return n * (n - c);
    case Kind::among: {
        const std::uint64_t e = nodes_.size();
        return e < 2 ? 0 : e * (e - 1);
    }
    }
    return 0;
}

std::pair<std::uint32_t, std::uint32_t> PairSampler::sample(Rng& rng) const {
    if (empty()) throw std::invalid_argument("pair sampler: empty relation");
    switch (kind_) {
    case Kind::all: {
        const std::uint32_t i = rng.below(n_);
        std::uint32_t j = rng.below(n_ - 1);
        if (j >= i) ++j;
        return {i, j};
    }
    case Kind::intra: {
        const std::uint32_t i = rng.below(n_);
        const std::uint32_t base = (i / community_size_) * community_size_;
        std::uint32_t j = base + rng.below(community_size_ - 1);
        if (j >= i) ++j;
        return {i, j};
    }
    case Kind::inter: {
        const std::uint32_t i = rng.below(n_);
        const std::uint32_t base = (i / community_size_) * community_size_;
        std::uint32_t j = rng.below(n_ - community_size_);
        if (j >= base) j += community_size_;
        return {i, j};
    }
    case Kind::among: {
        const std::uint32_t e = static_cast<std::uint32_t>(nodes_.size());
        const std::uint32_t a = rng.below(e);
        std::uint32_t b = rng.below(e - 1);
        if (b >= a) ++b;
        return {nodes_[a], nodes_[b]};
    }
    }
    throw std::logic_error("pair sampler: unreachable");
}

void PairSampler::for_each(const std::function<void(std::uint32_t, std::uint32_t)>& fn) const {
    switch (kind_) {
    case Kind::all:
        for (std::uint32_t i = 0; i < n_; ++i)
            for (std::uint32_t j = 0; j < n_; ++j)
                if (i != j) fn(i, j);
        return;
    case Kind::intra:
        for (std::uint32_t i = 0; i < n_; ++i) {
            const std::uint32_t base = (i / community_size_) * community_size_;
            for (std::uint32_t j = base; j < base + community_size_; ++j)
                if (i != j) fn(i, j);
        }
        return;
    case Kind::inter:
        for (std::uint32_t i = 0; i < n_; ++i) {
            const std::uint32_t base = (i / community_size_) * community_size_;
            for (std::uint32_t j = 0; j < n_; ++j)
                if (j < base || j >= base + community_size_) fn(i, j);
        }
        return;
    case Kind::among:
        for (std::uint32_t a = 0; a < nodes_.size(); ++a)
            for (std::uint32_t b = 0; b < nodes_.size(); ++b)
                if (a != b) fn(nodes_[a], nodes_[b]);
        return;
    }
}

Estimate succ(const PairBits& b1, const PairBits& b2, const PairSampler& sampler, std::uint64_t m,
              Rng& rng) {
    if (m == 0) throw std::invalid_argument("succ: m must be >= 1");
    if (sampler.empty()) throw std::invalid_argument("succ: empty relation");
    std::uint64_t agree = 0;
    for (std::uint64_t k = 0; k < m; ++k) {
        const auto [i, j] = sampler.sample(rng);
        if (b1(i, j) == b2(i, j)) ++agree;
    }
    return wilson_estimate(agree, m);
}

Estimate succ_exhaustive(const PairBits& b1, const PairBits& b2, const PairSampler& sampler) {
    if (sampler.empty()) throw std::invalid_argument("succ: empty relation");
    std::uint64_t agree = 0, total = 0;
    sampler.for_each([&](std::uint32_t i, std::uint32_t j) {
        ++total;
        if (b1(i, j) == b2(i, j)) ++agree;
    });
    const double value = static_cast<double>(agree) / static_cast<double>(total);
    return {value, value, value, total};
}

AdvEstimate adv(const PairBits& strategy, const PairBits& prior, const PairBits& truth,
                const PairSampler& sampler, std::uint64_t m, Rng& rng) {
    if (m == 0) throw std::invalid_argument("adv: m must be >= 1");
    if (sampler.empty()) throw std::invalid_argument("adv: empty relation");
    std::uint64_t strategy_hits = 0, prior_hits = 0;
    double diff_sum = 0.0, diff_sq = 0.0;
    for (std::uint64_t k = 0; k < m; ++k) {
        const auto [i, j] = sampler.sample(rng);
        const bool t = truth(i, j);
        const int s = strategy(i, j) == t ? 1 : 0;
        const int p = prior(i, j) == t ? 1 : 0;
        strategy_hits += static_cast<std::uint64_t>(s);
        prior_hits += static_cast<std::uint64_t>(p);
        const double d = s - p;
        diff_sum += d;
        diff_sq += d * d;
    }
    AdvEstimate out;
    out.value = diff_sum / static_cast<double>(m);
    const double var =
        m > 1 ? (diff_sq - diff_sum * diff_sum / static_cast<double>(m)) / static_cast<double>(m - 1)
              : 0.0;
    const double half = 1.96 * std::sqrt(std::max(0.0, var) / static_cast<double>(m));
    out.lo = out.value - half;
    out.hi = out.value + half;
    out.strategy_succ = wilson_estimate(strategy_hits, m);
    out.prior_succ = wilson_estimate(prior_hits, m);
    return out;
}

double adv_exhaustive(const PairBits& strategy, const PairBits& prior, const PairBits& truth,
                      const PairSampler& sampler) {
    const Estimate s = succ_exhaustive(strategy, truth, sampler);
    const Estimate p = succ_exhaustive(prior, truth, sampler);
    return s.value - p.value;
}

} // namespace pcd
