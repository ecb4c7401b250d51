#pragma once

#include <cstdint>
#include <string>

#include "pcd/cbrg.hpp"
#include "pcd/metrics.hpp"
#include "pcd/trw.hpp"

namespace pcd {

// Inputs of the closed-form error and advantage bounds. phi and visit_prob
// have no closed definition; they are always supplied explicitly, estimated
// by Monte-Carlo, or inverted from a target bound value — never silently
// defaulted.
struct BoundParams {
    std::uint32_t num_communities = 2; // K
    std::uint32_t community_size = 1;  // c
    double intra_prob = 0.0;           // p (echoed in reports; not used by the formulas)
    double inter_prob = 0.0;           // q
    std::uint32_t walkers_per_node = 1; // W
    std::uint32_t ttl = 0;              // L
    std::uint32_t threshold = 1;        // T
    double phi = 0.0;                   // false-positive coefficient
    double visit_prob = 0.0;            // P: per-walker chance of visiting a fixed
                                        // same-community node

    double mu() const {
        return static_cast<double>(community_size) * walkers_per_node * visit_prob;
    }
};

struct BoundValue {
    double raw = 0.0;     // formula value, may exceed 1
    double clamped = 0.0; // min(raw, 1) for reporting
    bool valid = true;    // false when the bound is vacuous in this regime
};

// phi * W * L * (L+1)^2 / (2 * (K-1) * T). Requires K >= 2.
BoundValue fpr_bound(const BoundParams& bp);

// exp(-mu * (1 - T/mu)^2 / 2) with mu = c*W*P. Reported as 1 and flagged
// invalid when T >= mu (the bound only holds below the mean).
BoundValue fnr_bound(const BoundParams& bp);

// 4 * W * (L+1) / ((K-1) * c), the advantage bound at full exploitation
// efficiency (gamma = 1). Requires K >= 2.
BoundValue adv_bound(const BoundParams& bp);

// Solve phi so that fpr_bound equals target. Exact algebra; re-evaluating
// reproduces the target to full precision.
double invert_phi(const BoundParams& bp, double target_fpr);

// Solve visit_prob so that fnr_bound equals target, picking the root with
// mu > T (the bound's validity region).
double invert_visit_prob(const BoundParams& bp, double target_fnr);

// Monte-Carlo estimate of P: the probability that a single walker issued by
// a uniformly drawn node visits a fixed distinct node of the same community.
// Walkers are simulated fresh from streams derived from (seed, trial).
Estimate estimate_visit_prob(const Graph& g, const TrwParams& params, std::uint32_t trials,
                             std::uint64_t seed);

// Monte-Carlo estimate of phi from a completed run, via the mean
// inter-community intersection size: E[|set_i ∩ set_j| | different
// communities] = phi * W * L * (L+1)^2 / (2 (K-1)), which makes fpr_bound the
// Markov bound E[X]/T. Requires L >= 1.
Estimate estimate_phi(const Graph& g, const WalkerSets& ws, const TrwParams& params,
                      std::uint32_t trials, std::uint64_t seed);

enum class CalibrationMode { pilot, bound };

struct CalibrationResult {
    bool feasible = false;
    std::uint32_t threshold = 1;
    double predicted_fpr = 0.0;
    double predicted_fnr = 0.0;
    double mu_hat = 0.0; // pilot mean intra intersection size
    std::string note;
};

// Pilot-based threshold recommendation: samples pilot_pairs_per_class intra
// and inter pairs from the run, sweeps T over [1, mu_hat], and returns the
// smallest T whose pilot FPR meets target_fpr; feasible only when that T
// also meets target_fnr (FNR is non-decreasing in T, so no larger T can).
CalibrationResult calibrate_threshold(const Graph& g, const WalkerSets& ws,
                                      std::uint32_t pilot_pairs_per_class, double target_fpr,
                                      double target_fnr, std::uint64_t seed);

// Same recommendation from the closed-form bounds, using the phi and
// visit_prob carried by bp.
CalibrationResult calibrate_threshold_bound(const BoundParams& bp, double target_fpr,
                                            double target_fnr);

} // namespace pcd
