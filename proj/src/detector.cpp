#include "pcd/detector.hpp"

#include <stdexcept>

#include "pcd/rng.hpp"

namespace pcd {

void DecisionConfig::validate() const {
    if (threshold < 1) throw std::invalid_argument("detector: threshold must be >= 1");
}

bool decide_pair(const WalkerSets& ws, const DecisionConfig& cfg, std::uint32_t i,
                 std::uint32_t j) {
    cfg.validate();
    if (i == j)
        throw std::invalid_argument("detector: the diagonal is definitionally 1; query i != j");
    // Same bit as run_psi(cfg.variant, ...).decision for every variant: the
    // variant only changes the leakage transcript.
    return intersection_at_least(ws.set_of(i), ws.set_of(j), cfg.threshold);
}

ErrorRates empirical_error_rates(const WalkerSets& ws, const DecisionConfig& cfg, const Graph& g,
                                 std::uint32_t m, std::uint64_t seed) {
    cfg.validate();
    if (m < 1) throw std::invalid_argument("detector: sample size must be >= 1");
    ErrorRates rates;

    const PairSampler inter = PairSampler::inter(g);
    if (!inter.empty()) {
        Rng rng(derive(seed, 0x46505221)); // false-positive sampling stream
        std::uint64_t positives = 0;
        for (std::uint32_t k = 0; k < m; ++k) {
            const auto [i, j] = inter.sample(rng);
            if (decide_pair(ws, cfg, i, j)) ++positives;
        }
        rates.fpr = wilson_estimate(positives, m);
    }

    const PairSampler intra = PairSampler::intra(g);
    if (!intra.empty()) {
        Rng rng(derive(seed, 0x464e5221)); // false-negative sampling stream
        std::uint64_t negatives = 0;
        for (std::uint32_t k = 0; k < m; ++k) {
            const auto [i, j] = intra.sample(rng);
            if (!decide_pair(ws, cfg, i, j)) ++negatives;
        }
        rates.fnr = wilson_estimate(negatives, m);
    }
    return rates;
}

std::vector<std::uint8_t> build_row(const WalkerSets& ws, const DecisionConfig& cfg,
                                    std::uint32_t i) {
    cfg.validate();
    const std::uint32_t n = ws.node_count();
    if (i >= n) throw std::out_of_range("detector: node index out of range");
    std::vector<std::uint8_t> row(n, 0);
    row[i] = 1;
    for (std::uint32_t j = 0; j < n; ++j)
        if (j != i) row[j] = decide_pair(ws, cfg, i, j) ? 1 : 0;
    return row;
}

} // namespace pcd
