#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcd/bounds.hpp"
#include "pcd/cbrg.hpp"
#include "pcd/detector.hpp"
#include "pcd/metrics.hpp"
#include "pcd/psi.hpp"
#include "pcd/trw.hpp"

namespace pcd {

// Everything treated as common knowledge: generation and protocol
// parameters, but no seeds and no per-node data.
struct PublicParams {
    std::uint32_t num_communities = 1; // K
    std::uint32_t community_size = 1;  // c
    double intra_prob = 0.0;           // p
    double inter_prob = 0.0;           // q
    std::uint32_t walkers_per_node = 1; // W
    std::uint32_t ttl = 0;              // L
    std::uint32_t threshold = 1;        // T
};

struct PsiTranscript {
    std::uint32_t peer = 0;
    PsiOutcome outcome;
};

// The view of a passive sniffer sitting on node `sniffed`: the node's
// legitimate protocol sequence and nothing else. Foreign information enters
// only through psi_transcripts, whose payloads depend on the variant.
struct AdversaryView {
    std::uint32_t sniffed = 0;
    PsiVariant variant = PsiVariant::psi_threshold;
    std::vector<std::uint32_t> neighbors;
    NodeTranscript transcript;       // walker arrivals at the sniffed node
    std::vector<WalkerId> own_set;   // the node's accumulated walker ids
    std::vector<PsiTranscript> psi_transcripts; // one per peer, peer ascending
    std::vector<std::uint8_t> result_row;       // the node's detected row M_{a,:}
    PublicParams public_params;

    // V - U(a), with U(a) read from the adversary's own result row.
    std::vector<std::uint32_t> challenge_nodes() const;
};

// trw supplies the public W and L; its seed is not copied into the view.
AdversaryView build_view(const Graph& g, const TrwRun& run, const DecisionConfig& cfg,
                         const TrwParams& trw, std::uint32_t sniffed);

// Total payload bits of the foreign PSI transcripts (serialization audit).
// Under psi_threshold this is exactly n-1.
std::uint64_t foreign_leakage_bits(const AdversaryView& view);

// A strategy's output: guessed community matrix M^A and connection matrix
// C^A, represented as pair accessors defined on the challenge relation.
struct Guess {
    std::string strategy;
    PairBits community;  // M^A
    PairBits connection; // C^A
};

// Majority-bit guess from public priors alone: constant bits chosen from the
// expected same-community fraction and edge density over the challenge
// relation. Applicable to every variant.
Guess prior_guess(const AdversaryView& view);

// Recomputes intersections from the collected raw or hashed sets; guesses
// M^A by thresholding and C^A by ranking co-occurrence scores within the
// guessed communities, keeping the top intra_prob fraction as edges.
// Requires plain_exchange or hashed_exchange leakage.
Guess intersection_attack(const AdversaryView& view);

// Uses the leaked intersections I_j = set(a) ∩ set(j): affinity(i, j) =
// |I_i ∩ I_j|, thresholded at a cutoff calibrated by simulating the public
// parameters. C^A falls back to the prior. Requires psi_set leakage.
Guess psiset_attack(const AdversaryView& view);

// The strategies runnable on a view of the given variant.
std::vector<std::string> applicable_strategies(PsiVariant variant);

// Runs prior_guess/intersection_attack/psiset_attack by name.
Guess run_strategy(const std::string& name, const AdversaryView& view);

struct StrategyEval {
    std::string strategy;
    Estimate succ_m;
    Estimate succ_c;
    AdvEstimate adv_m;
    AdvEstimate adv_c;
    double bound_raw = 0.0;     // advantage bound at gamma = 1
    double bound_clamped = 0.0;
    double gamma_hat_m = 0.0;   // implied exploitation efficiency adv / bound
    double gamma_hat_c = 0.0;
};

// Paired evaluation of a guess on the challenge relation: Succ against the
// ground truth and Adv against the prior strategy on the same sampled pairs.
StrategyEval evaluate(const Guess& guess, const Graph& g, const AdversaryView& view,
                      std::uint64_t m, std::uint64_t seed);

} // namespace pcd
