#include "pcd/adversary.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

#include "pcd/rng.hpp"

namespace pcd {

namespace {

constexpr std::uint64_t kEvalTagM = 0x4d455641;    // M-relation evaluation stream
constexpr std::uint64_t kEvalTagC = 0x43455641;    // C-relation evaluation stream
constexpr std::uint64_t kPilotSeed = 0xad5e0bb5;   // adversary-local calibration randomness
constexpr std::uint32_t kPilotSamples = 4000;
constexpr std::size_t kFullScanLimit = 2000; // eligible-set size up to which the
                                             // co-occurrence calibration scans all pairs
constexpr std::uint32_t kQuantileSamples = 20000;

PublicParams public_params_of(const Graph& g, const TrwParams& trw, std::uint32_t threshold) {
    const CbrgParams& p = g.params();
    return {p.num_communities, p.community_size, p.intra_prob, p.inter_prob,
            trw.walkers_per_node, trw.ttl, threshold};
}

// Expected fraction of same-community pairs over the challenge relation,
// assuming it consists of the K-1 foreign communities.
double expected_same_fraction(const PublicParams& pp) {
    const double k = pp.num_communities;
    const double c = pp.community_size;
    const double eligible = (k - 1) * c;
    if (eligible < 2) return 1.0;
    return (c - 1) / (eligible - 1);
}

} // namespace

std::vector<std::uint32_t> AdversaryView::challenge_nodes() const {
    std::vector<std::uint32_t> nodes;
    for (std::uint32_t v = 0; v < result_row.size(); ++v)
        if (!result_row[v]) nodes.push_back(v);
    return nodes;
}

AdversaryView build_view(const Graph& g, const TrwRun& run, const DecisionConfig& cfg,
                         const TrwParams& trw, std::uint32_t sniffed) {
    cfg.validate();
    const std::uint32_t n = g.node_count();
    if (sniffed >= n) throw std::out_of_range("adversary: sniffed node out of range");

    AdversaryView view;
    view.sniffed = sniffed;
    view.variant = cfg.variant;
    const auto nb = g.neighbors(sniffed);
    view.neighbors.assign(nb.begin(), nb.end());
    view.transcript = run.transcripts.at(sniffed);
    view.own_set = run.sets.set_of(sniffed);
    view.result_row.assign(n, 0);
    view.result_row[sniffed] = 1;
    view.psi_transcripts.reserve(n - 1);
    for (std::uint32_t j = 0; j < n; ++j) {
        if (j == sniffed) continue;
        PsiOutcome outcome =
            run_psi(cfg.variant, run.sets.set_of(sniffed), run.sets.set_of(j), cfg.threshold);
        view.result_row[j] = outcome.decision ? 1 : 0;
        view.psi_transcripts.push_back({j, std::move(outcome)});
    }
    view.public_params = public_params_of(g, trw, cfg.threshold);
    return view;
}

std::uint64_t foreign_leakage_bits(const AdversaryView& view) {
    std::uint64_t bits = 0;
    for (const auto& t : view.psi_transcripts) {
        if (const auto* plain = std::get_if<PlainLeakage>(&t.outcome.leakage)) {
            bits += 128ull * plain->set_j.size(); // set_i is the sniffed node's own
        } else if (const auto* hashed = std::get_if<HashedLeakage>(&t.outcome.leakage)) {
            bits += 128ull * hashed->hashed_j.size();
        } else {
            bits += leakage_audit(t.outcome).bits;
        }
    }
    return bits;
}

Guess prior_guess(const AdversaryView& view) {
    const PublicParams& pp = view.public_params;
    const double frac_same = expected_same_fraction(pp);
    const double density = frac_same * pp.intra_prob + (1.0 - frac_same) * pp.inter_prob;
    const bool m_bit = frac_same > 0.5;
    const bool c_bit = density > 0.5;
    return {"prior", [m_bit](std::uint32_t, std::uint32_t) { return m_bit; },
            [c_bit](std::uint32_t, std::uint32_t) { return c_bit; }};
}

Guess intersection_attack(const AdversaryView& view) {
    if (view.variant != PsiVariant::plain_exchange && view.variant != PsiVariant::hashed_exchange)
        throw std::invalid_argument(
            "intersection attack: requires plain-exchange or hashed-exchange leakage");

    const std::uint32_t n = static_cast<std::uint32_t>(view.result_row.size());
    auto sets = std::make_shared<std::vector<std::vector<WalkerId>>>(n);
    if (view.variant == PsiVariant::plain_exchange) {
        (*sets)[view.sniffed] = view.own_set;
        for (const auto& t : view.psi_transcripts)
            (*sets)[t.peer] = std::get<PlainLeakage>(t.outcome.leakage).set_j;
    } else {
        // Work entirely in the hashed domain; a consistent one-way function
        // preserves intersections.
        auto& own = (*sets)[view.sniffed];
        own.reserve(view.own_set.size());
        for (const auto& id : view.own_set) own.push_back(hash_id(id));
        std::sort(own.begin(), own.end());
        for (const auto& t : view.psi_transcripts)
            (*sets)[t.peer] = std::get<HashedLeakage>(t.outcome.leakage).hashed_j;
    }

    const std::uint32_t threshold = view.public_params.threshold;
    PairBits community = [sets, threshold](std::uint32_t i, std::uint32_t j) {
        return intersection_at_least((*sets)[i], (*sets)[j], threshold);
    };

    // Connection guess: co-occurrence score |S_i ∩ S_j|, keeping the top
    // intra_prob fraction of the pairs already guessed same-community.
    const std::vector<std::uint32_t> eligible = view.challenge_nodes();
    std::vector<std::uint32_t> scores;
    if (eligible.size() >= 2 && eligible.size() <= kFullScanLimit) {
        for (std::size_t a = 0; a < eligible.size(); ++a)
            for (std::size_t b = a + 1; b < eligible.size(); ++b) {
                const auto s = intersection_count((*sets)[eligible[a]], (*sets)[eligible[b]]);
                if (s >= threshold) scores.push_back(static_cast<std::uint32_t>(s));
            }
    } else if (eligible.size() > kFullScanLimit) {
        Rng rng(derive(kPilotSeed, 0x71));
        const std::uint32_t e = static_cast<std::uint32_t>(eligible.size());
        for (std::uint32_t k = 0; k < kQuantileSamples; ++k) {
            const std::uint32_t a = rng.below(e);
            std::uint32_t b = rng.below(e - 1);
            if (b >= a) ++b;
            const auto s = intersection_count((*sets)[eligible[a]], (*sets)[eligible[b]]);
            if (s >= threshold) scores.push_back(static_cast<std::uint32_t>(s));
        }
    }
    std::uint32_t cutoff = UINT32_MAX; // no edges when nothing was guessed intra
    if (!scores.empty()) {
        std::sort(scores.begin(), scores.end(), std::greater<>());
        const auto keep = static_cast<std::size_t>(
            std::llround(view.public_params.intra_prob * static_cast<double>(scores.size())));
        cutoff = keep == 0 ? UINT32_MAX : scores[keep - 1];
    }
    PairBits connection = [sets, threshold, cutoff](std::uint32_t i, std::uint32_t j) {
        const auto s = intersection_count((*sets)[i], (*sets)[j]);
        return s >= threshold && s >= cutoff;
    };

    return {"intersection", std::move(community), std::move(connection)};
}

namespace {

// Chooses the affinity cutoff for the psi-set attack by simulating the
// public parameters and measuring, for each candidate cutoff, the success
// rate it would achieve over a challenge-like pair mix.
std::uint32_t calibrate_affinity_cutoff(const PublicParams& pp) {
    CbrgParams cbrg{pp.num_communities, pp.community_size, pp.intra_prob, pp.inter_prob,
                    derive(kPilotSeed, 0x01)};
    TrwParams trw{pp.walkers_per_node, pp.ttl, derive(kPilotSeed, 0x02)};
    const Graph pilot = generate(cbrg);
    const TrwRun run = run_trw(pilot, trw);

    const std::uint32_t n = pilot.node_count();
    const std::uint32_t c = pilot.community_size();
    const std::uint32_t k = pilot.num_communities();
    const std::uint32_t a0 = 0;
    std::vector<std::vector<WalkerId>> conditional(n);
    const auto& own = run.sets.set_of(a0);
    for (std::uint32_t j = 0; j < n; ++j) {
        const auto& s = run.sets.set_of(j);
        std::set_intersection(own.begin(), own.end(), s.begin(), s.end(),
                              std::back_inserter(conditional[j]));
    }

    if (k < 2 || c < 2) return 1;
    Rng rng(derive(kPilotSeed, 0x03));
    const std::uint32_t eligible_base = c; // everything outside a0's community
    const std::uint32_t eligible_count = n - c;

    std::vector<std::uint32_t> intra_aff(kPilotSamples, 0);
    for (auto& aff : intra_aff) {
        const std::uint32_t i = eligible_base + rng.below(eligible_count);
        const std::uint32_t base = (i / c) * c;
        std::uint32_t j = base + rng.below(c - 1);
        if (j >= i) ++j;
        aff = static_cast<std::uint32_t>(intersection_count(conditional[i], conditional[j]));
    }
    std::vector<std::uint32_t> inter_aff;
    if (k >= 3) {
        inter_aff.resize(kPilotSamples, 0);
        for (auto& aff : inter_aff) {
            const std::uint32_t i = eligible_base + rng.below(eligible_count);
            std::uint32_t j;
            do {
                j = eligible_base + rng.below(eligible_count);
            } while (j / c == i / c);
            aff = static_cast<std::uint32_t>(intersection_count(conditional[i], conditional[j]));
        }
    }

    const double frac_same = expected_same_fraction(pp);
    std::uint32_t max_aff = 1;
    for (std::uint32_t a : intra_aff) max_aff = std::max(max_aff, a);
    std::uint32_t best_cutoff = 1;
    double best_score = -1.0;
    for (std::uint32_t cut = 1; cut <= max_aff + 1; ++cut) {
        std::size_t intra_hits = 0;
        for (std::uint32_t a : intra_aff)
            if (a >= cut) ++intra_hits;
        double score = frac_same * static_cast<double>(intra_hits) / intra_aff.size();
        if (!inter_aff.empty()) {
            std::size_t inter_rejects = 0;
            for (std::uint32_t a : inter_aff)
                if (a < cut) ++inter_rejects;
            score +=
                (1.0 - frac_same) * static_cast<double>(inter_rejects) / inter_aff.size();
        }
        if (score > best_score) {
            best_score = score;
            best_cutoff = cut;
        }
    }
    return best_cutoff;
}

} // namespace

Guess psiset_attack(const AdversaryView& view) {
    if (view.variant != PsiVariant::psi_set)
        throw std::invalid_argument("psi-set attack: requires psi-set leakage");

    const std::uint32_t n = static_cast<std::uint32_t>(view.result_row.size());
    auto conditional = std::make_shared<std::vector<std::vector<WalkerId>>>(n);
    (*conditional)[view.sniffed] = view.own_set;
    for (const auto& t : view.psi_transcripts)
        (*conditional)[t.peer] = std::get<SetLeakage>(t.outcome.leakage).intersection;

    const std::uint32_t cutoff = calibrate_affinity_cutoff(view.public_params);
    PairBits community = [conditional, cutoff](std::uint32_t i, std::uint32_t j) {
        return intersection_count((*conditional)[i], (*conditional)[j]) >= cutoff;
    };
    // The leaked intersections say nothing direct about edges; fall back to
    // the prior for C.
    return {"psiset", std::move(community), prior_guess(view).connection};
}

std::vector<std::string> applicable_strategies(PsiVariant variant) {
    switch (variant) {
    case PsiVariant::plain_exchange:
    case PsiVariant::hashed_exchange: return {"prior", "intersection"};
    case PsiVariant::psi_set: return {"prior", "psiset"};
    case PsiVariant::psi_cardinality:
    case PsiVariant::psi_threshold: return {"prior"};
    }
    return {"prior"};
}

Guess run_strategy(const std::string& name, const AdversaryView& view) {
    if (name == "prior") return prior_guess(view);
    if (name == "intersection") return intersection_attack(view);
    if (name == "psiset") return psiset_attack(view);
    throw std::invalid_argument("unknown adversary strategy: '" + name + "'");
}

StrategyEval evaluate(const Guess& guess, const Graph& g, const AdversaryView& view,
                      std::uint64_t m, std::uint64_t seed) {
    const std::vector<std::uint32_t> eligible = view.challenge_nodes();
    const PairSampler challenge = PairSampler::among(eligible);
    if (challenge.empty())
        throw std::invalid_argument("adversary: empty challenge relation (K = 1?)");

    const Guess prior = prior_guess(view);
    PairBits truth_m = [&g](std::uint32_t i, std::uint32_t j) { return g.same_community(i, j); };
    PairBits truth_c = [&g](std::uint32_t i, std::uint32_t j) { return g.has_edge(i, j); };

    StrategyEval eval;
    eval.strategy = guess.strategy;
    Rng rng_m(derive(seed, kEvalTagM));
    eval.adv_m = adv(guess.community, prior.community, truth_m, challenge, m, rng_m);
    eval.succ_m = eval.adv_m.strategy_succ;
    Rng rng_c(derive(seed, kEvalTagC));
    eval.adv_c = adv(guess.connection, prior.connection, truth_c, challenge, m, rng_c);
    eval.succ_c = eval.adv_c.strategy_succ;

    BoundParams bp;
    bp.num_communities = view.public_params.num_communities;
    bp.community_size = view.public_params.community_size;
    bp.walkers_per_node = view.public_params.walkers_per_node;
    bp.ttl = view.public_params.ttl;
    bp.threshold = view.public_params.threshold;
    const BoundValue bound = adv_bound(bp);
    eval.bound_raw = bound.raw;
    eval.bound_clamped = bound.clamped;
    eval.gamma_hat_m = bound.raw > 0 ? eval.adv_m.value / bound.raw : 0.0;
    eval.gamma_hat_c = bound.raw > 0 ? eval.adv_c.value / bound.raw : 0.0;
    return eval;
}

} // namespace pcd
