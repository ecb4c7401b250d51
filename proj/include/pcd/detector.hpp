#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pcd/cbrg.hpp"
#include "pcd/metrics.hpp"
#include "pcd/psi.hpp"
#include "pcd/trw.hpp"

namespace pcd {

struct DecisionConfig {
    std::uint32_t threshold = 1; // T
    PsiVariant variant = PsiVariant::psi_threshold;

    void validate() const;
};

// Honest community decision for one pair: the PSI decision bit
// [|set(i) ∩ set(j)| >= T]. The variant changes what leaks, never the bit.
// i == j is rejected; the diagonal is definitionally 1.
bool decide_pair(const WalkerSets& ws, const DecisionConfig& cfg, std::uint32_t i,
                 std::uint32_t j);

struct ErrorRates {
    // Fraction of sampled inter-community pairs decided 1. Unset when the
    // graph has no inter pairs (K = 1).
    std::optional<Estimate> fpr;
    // Fraction of sampled intra-community pairs decided 0. Unset when the
    // graph has no intra pairs (c = 1).
    std::optional<Estimate> fnr;
};

// Samples m uniform intra pairs and m uniform inter pairs (each i != j,
// with replacement) and scores decide_pair against the block ground truth.
ErrorRates empirical_error_rates(const WalkerSets& ws, const DecisionConfig& cfg, const Graph& g,
                                 std::uint32_t m, std::uint64_t seed);

// One full detected row M_{i,:}; diagonal entry is 1.
std::vector<std::uint8_t> build_row(const WalkerSets& ws, const DecisionConfig& cfg,
                                    std::uint32_t i);

} // namespace pcd
