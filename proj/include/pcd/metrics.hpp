#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pcd/cbrg.hpp"
#include "pcd/rng.hpp"

namespace pcd {

// Point estimate with a 95% confidence interval.
struct Estimate {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t samples = 0;
};

// Wilson score interval for a binomial proportion.
Estimate wilson_estimate(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

// Uniform sampler over a relation of ordered node pairs (i, j), i != j.
// Sampling is with replacement, matching a probability under a uniform draw.
class PairSampler {
  public:
    // All ordered pairs of distinct nodes.
    static PairSampler all_pairs(const Graph& g);
    // Pairs of distinct nodes sharing a community.
    static PairSampler intra(const Graph& g);
    // Pairs of nodes from different communities.
    static PairSampler inter(const Graph& g);
    // Pairs of distinct nodes drawn from an explicit eligible set
    // (the challenge relation given V - U(a)).
    static PairSampler among(std::vector<std::uint32_t> nodes);

    bool empty() const { return pair_count() == 0; }
    std::uint64_t pair_count() const;

    std::pair<std::uint32_t, std::uint32_t> sample(Rng& rng) const;

    // Exhaustive enumeration of the relation, for desk-scale oracle checks.
    void for_each(const std::function<void(std::uint32_t, std::uint32_t)>& fn) const;

  private:
    enum class Kind { all, intra, inter, among };

    PairSampler(Kind kind, std::uint32_t n, std::uint32_t community_size,
                std::vector<std::uint32_t> nodes)
        : kind_(kind), n_(n), community_size_(community_size), nodes_(std::move(nodes)) {}

    Kind kind_;
    std::uint32_t n_ = 0;
    std::uint32_t community_size_ = 1;
    std::vector<std::uint32_t> nodes_;
};

// Bit accessor over node pairs: one row of a {0,1} matrix such as M or C.
using PairBits = std::function<bool(std::uint32_t, std::uint32_t)>;

// Pr{ b1(i,j) == b2(i,j) } over a uniform pair from the relation, estimated
// from m samples with a Wilson interval. Throws on an empty relation.
Estimate succ(const PairBits& b1, const PairBits& b2, const PairSampler& sampler, std::uint64_t m,
              Rng& rng);

// Exact value by enumerating the full relation.
Estimate succ_exhaustive(const PairBits& b1, const PairBits& b2, const PairSampler& sampler);

struct AdvEstimate {
    double value = 0.0; // Succ(strategy) - Succ(prior), paired
    double lo = 0.0;
    double hi = 0.0;
    Estimate strategy_succ;
    Estimate prior_succ;
};

// Paired advantage estimator: strategy and prior are scored on the identical
// sample sequence; the CI is the normal interval of the per-pair differences.
AdvEstimate adv(const PairBits& strategy, const PairBits& prior, const PairBits& truth,
                const PairSampler& sampler, std::uint64_t m, Rng& rng);

double adv_exhaustive(const PairBits& strategy, const PairBits& prior, const PairBits& truth,
                      const PairSampler& sampler);

} // namespace pcd
