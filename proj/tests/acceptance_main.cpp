// Acceptance suite: one check per shipped guarantee, each printed as a
// single PASS/FAIL line with its runtime. Exits nonzero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "pcd/adversary.hpp"
#include "pcd/bounds.hpp"
#include "pcd/cbrg.hpp"
#include "pcd/detector.hpp"
#include "pcd/experiment.hpp"
#include "pcd/metrics.hpp"
#include "pcd/psi.hpp"
#include "pcd/rng.hpp"
#include "pcd/trw.hpp"

namespace {

using pcd::BoundParams;
using pcd::CbrgParams;
using pcd::DecisionConfig;
using pcd::Estimate;
using pcd::Graph;
using pcd::PsiVariant;
using pcd::TrwParams;
using pcd::TrwRun;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

BoundParams paper_bound_params() {
    BoundParams bp;
    bp.num_communities = 100;
    bp.community_size = 500;
    bp.walkers_per_node = 100;
    bp.ttl = 3;
    bp.threshold = 61;
    return bp;
}

double se_of(const Estimate& e) { return (e.hi - e.lo) / (2 * 1.96); }

// --- 1. advantage-bound reproduction ---------------------------------------
Check criterion_advantage_bound() {
    Check c;
    const pcd::BoundValue b = pcd::adv_bound(paper_bound_params());
    c.require(std::fabs(b.raw - 1600.0 / 49500.0) < 1e-15, "exact fraction mismatch");
    c.require(std::fabs(b.raw - 0.032) < 5e-4, "does not round to 0.032");
    c.require(b.valid, "bound unexpectedly vacuous");

    // The evaluation itself must cost well under a millisecond.
    const auto start = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (int k = 0; k < 1000; ++k) sink += pcd::adv_bound(paper_bound_params()).raw;
    const double per_call =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 1000.0;
    c.require(per_call < 1e-3, "evaluation slower than 1 ms");
    c.require(sink > 0.0, "sink");

    char buf[96];
    std::snprintf(buf, sizeof(buf), "4W(L+1)/((K-1)c) = %.6f (%.1f ns/eval)", b.raw,
                  per_call * 1e9);
    if (c.ok) c.detail = buf;
    return c;
}

// --- 2. bound inversions + estimator consistency ----------------------------
Check criterion_inversions() {
    Check c;
    const BoundParams bp = paper_bound_params();

    const double phi = pcd::invert_phi(bp, 0.066);
    BoundParams with_phi = bp;
    with_phi.phi = phi;
    c.require(std::fabs(pcd::fpr_bound(with_phi).raw - 0.066) <= 0.066 * 1e-9,
              "phi inversion round trip");

    const double visit_prob = pcd::invert_visit_prob(bp, 1.9e-22);
    BoundParams with_p = bp;
    with_p.visit_prob = visit_prob;
    c.require(std::fabs(pcd::fnr_bound(with_p).raw - 1.9e-22) <= 1.9e-22 * 1e-9,
              "P inversion round trip");
    c.require(visit_prob >= 3e-3 && visit_prob <= 6e-3, "inverted P outside [3e-3, 6e-3]");

    // Monte-Carlo estimate of P on a reduced instance that keeps the
    // community size and the p/beta1 escape ratio of the full-scale setting
    // (K=4, q chosen so (K-1)q = 0.0495).
    const CbrgParams scaled{4, 500, 0.5, 0.0495 / 3.0, 2024};
    const Graph g = pcd::generate(scaled);
    const Estimate est = pcd::estimate_visit_prob(g, {100, 3, 77}, 150000, 78);
    c.require(est.hi >= 3e-3 && est.lo <= 6e-3, "estimator CI misses [3e-3, 6e-3]");
    char buf[128];
    std::snprintf(buf, sizeof(buf), "phi=%.6f P_inv=%.3e P_hat=%.3e ci [%.3e, %.3e]", phi,
                  visit_prob, est.value, est.lo, est.hi);
    c.detail = c.ok ? buf : c.detail + " | " + buf;
    return c;
}

// --- 3. desk-scale error rates vs bounds ------------------------------------
Check criterion_desk_error_rates() {
    Check c;
    const CbrgParams cbrg{10, 50, 0.5, 0.0005, 1};
    const TrwParams trw{100, 3, 2};
    const Graph g = pcd::generate(cbrg);
    const TrwRun run = pcd::run_trw(g, trw);

    const pcd::CalibrationResult cal =
        pcd::calibrate_threshold(g, run.sets, 2000, 0.05, 0.01, 3);
    c.require(cal.feasible, "calibration infeasible at desk scale");

    const DecisionConfig cfg{cal.threshold, PsiVariant::psi_threshold};
    const pcd::ErrorRates rates = pcd::empirical_error_rates(run.sets, cfg, g, 2000, 4);
    c.require(rates.fpr.has_value() && rates.fnr.has_value(), "rates missing");
    const double fpr = rates.fpr->value;
    const double fnr = rates.fnr->value;
    c.require(fnr <= 0.01, "empirical FNR above 0.01");
    c.require(fpr <= 0.10, "empirical FPR above 0.10");

    BoundParams bp;
    bp.num_communities = cbrg.num_communities;
    bp.community_size = cbrg.community_size;
    bp.walkers_per_node = trw.walkers_per_node;
    bp.ttl = trw.ttl;
    bp.threshold = cal.threshold;
    const Estimate phi = pcd::estimate_phi(g, run.sets, trw, 20000, 5);
    const Estimate visit = pcd::estimate_visit_prob(g, trw, 20000, 6);
    bp.phi = phi.value;
    bp.visit_prob = visit.value;
    const double fpr_bound_val = pcd::fpr_bound(bp).clamped;
    const double fnr_bound_val = pcd::fnr_bound(bp).clamped;

    // 3-sigma allowance combining the rate SE with the estimated-bound SE.
    BoundParams hi = bp;
    hi.phi = phi.hi;
    const double fpr_bound_se = (pcd::fpr_bound(hi).clamped - fpr_bound_val) / 1.96;
    const double fpr_se = se_of(*rates.fpr);
    c.require(fpr <= fpr_bound_val + 3 * std::sqrt(fpr_se * fpr_se + fpr_bound_se * fpr_bound_se),
              "FPR above its estimated bound");
    BoundParams lo = bp;
    lo.visit_prob = visit.lo;
    const double fnr_bound_se = (pcd::fnr_bound(lo).clamped - fnr_bound_val) / 1.96;
    const double fnr_se = se_of(*rates.fnr);
    c.require(fnr <= fnr_bound_val + 3 * std::sqrt(fnr_se * fnr_se + fnr_bound_se * fnr_bound_se),
              "FNR above its estimated bound");

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "T=%u fpr=%.4f (bound %.4f) fnr=%.4f (bound %.3g) phi_hat=%.4g P_hat=%.4g",
                  cal.threshold, fpr, fpr_bound_val, fnr, fnr_bound_val, phi.value, visit.value);
    c.detail = c.ok ? buf : c.detail + " | " + buf;
    return c;
}

// --- 4. leakage hierarchy ----------------------------------------------------
Check criterion_leakage_hierarchy() {
    Check c;
    const CbrgParams cbrg{10, 50, 0.5, 0.0005, 1};
    const TrwParams trw{100, 3, 2};
    const Graph g = pcd::generate(cbrg);
    const TrwRun run = pcd::run_trw(g, trw);
    const pcd::CalibrationResult cal =
        pcd::calibrate_threshold(g, run.sets, 2000, 0.05, 0.01, 3);
    const std::uint32_t threshold = cal.feasible ? cal.threshold : 1;
    const std::uint32_t sniffed = 123;

    // (a) psi-threshold transcripts hold exactly n-1 foreign bits.
    const pcd::AdversaryView thresh_view =
        pcd::build_view(g, run, {threshold, PsiVariant::psi_threshold}, trw, sniffed);
    c.require(pcd::foreign_leakage_bits(thresh_view) == g.node_count() - 1,
              "foreign bits != n-1 under psi-threshold");

    // (b) plain exchange: the intersection attack matches the honest
    // detector's accuracy on the challenge relation.
    const pcd::AdversaryView plain_view =
        pcd::build_view(g, run, {threshold, PsiVariant::plain_exchange}, trw, sniffed);
    const pcd::Guess attack = pcd::intersection_attack(plain_view);
    const pcd::PairSampler challenge = pcd::PairSampler::among(plain_view.challenge_nodes());
    const pcd::PairBits truth_m = [&g](std::uint32_t i, std::uint32_t j) {
        return g.same_community(i, j);
    };
    const pcd::PairBits honest = [&run, threshold](std::uint32_t i, std::uint32_t j) {
        return pcd::decide_pair(run.sets, {threshold, PsiVariant::psi_threshold}, i, j);
    };
    pcd::Rng rng_attack(900);
    const Estimate attack_succ = pcd::succ(attack.community, truth_m, challenge, 4000, rng_attack);
    pcd::Rng rng_honest(900); // same sample sequence
    const Estimate honest_succ = pcd::succ(honest, truth_m, challenge, 4000, rng_honest);
    const double two_se =
        2 * std::sqrt(std::pow(se_of(attack_succ), 2) + std::pow(se_of(honest_succ), 2));
    c.require(attack_succ.value >= honest_succ.value - two_se,
              "plain-exchange attack below honest accuracy");

    // (c) under psi-threshold every runnable strategy stays within the
    // advantage bound at gamma = 1.
    for (const std::string& name : pcd::applicable_strategies(PsiVariant::psi_threshold)) {
        const pcd::Guess guess = pcd::run_strategy(name, thresh_view);
        const pcd::StrategyEval eval = pcd::evaluate(guess, g, thresh_view, 4000, 901);
        const double se_m = (eval.adv_m.hi - eval.adv_m.lo) / (2 * 1.96);
        const double se_c = (eval.adv_c.hi - eval.adv_c.lo) / (2 * 1.96);
        c.require(eval.adv_m.value <= eval.bound_clamped + 3 * se_m,
                  name + ": adv_M above the bound");
        c.require(eval.adv_c.value <= eval.bound_clamped + 3 * se_c,
                  name + ": adv_C above the bound");
    }

    char buf[128];
    std::snprintf(buf, sizeof(buf), "bits=%llu attack_succ=%.4f honest_succ=%.4f",
                  static_cast<unsigned long long>(pcd::foreign_leakage_bits(thresh_view)),
                  attack_succ.value, honest_succ.value);
    c.detail = c.ok ? buf : c.detail + " | " + buf;
    return c;
}

// --- 5. oracle equivalence on desk graphs -----------------------------------
Check criterion_oracle_equivalence() {
    Check c;
    const std::vector<CbrgParams> corpus = {
        {2, 2, 1.0, 0.0, 11},  {1, 3, 1.0, 0.0, 12},  {2, 10, 0.8, 0.1, 13},
        {4, 10, 0.7, 0.05, 14}, {3, 5, 0.9, 0.2, 15},  {2, 4, 0.3, 0.0, 16},
    };
    for (const CbrgParams& params : corpus) {
        const Graph g = pcd::generate(params);
        if (g.node_count() > 40) {
            c.require(false, "corpus graph exceeds 40 nodes");
            continue;
        }
        const TrwRun run = pcd::run_trw(g, {4, 2, params.seed + 100});

        // (a) PSI decisions equal brute-force intersection thresholding for
        // every pair, variant and threshold.
        for (std::uint32_t i = 0; i < g.node_count(); ++i)
            for (std::uint32_t j = i + 1; j < g.node_count(); ++j) {
                const auto& a = run.sets.set_of(i);
                const auto& b = run.sets.set_of(j);
                std::size_t brute = 0;
                for (const auto& x : a)
                    for (const auto& y : b)
                        if (x == y) ++brute;
                for (std::uint32_t t : {1u, 3u})
                    for (PsiVariant v :
                         {PsiVariant::plain_exchange, PsiVariant::hashed_exchange,
                          PsiVariant::psi_set, PsiVariant::psi_cardinality,
                          PsiVariant::psi_threshold})
                        if (pcd::run_psi(v, a, b, t).decision != (brute >= t))
                            c.require(false, "psi decision mismatch");
            }

        // (b) sampled Succ/Adv vs exhaustive enumeration.
        const pcd::PairSampler all = pcd::PairSampler::all_pairs(g);
        const pcd::PairBits detected = [&run](std::uint32_t i, std::uint32_t j) {
            return pcd::decide_pair(run.sets, {1, PsiVariant::psi_threshold}, i, j);
        };
        const pcd::PairBits truth = [&g](std::uint32_t i, std::uint32_t j) {
            return g.same_community(i, j);
        };
        const pcd::PairBits zero = [](std::uint32_t, std::uint32_t) { return false; };
        const Estimate exact = pcd::succ_exhaustive(detected, truth, all);
        pcd::Rng rng(params.seed + 500);
        const Estimate sampled = pcd::succ(detected, truth, all, 50 * all.pair_count(), rng);
        c.require(sampled.lo <= exact.value && exact.value <= sampled.hi,
                  "sampled Succ outside CI of exhaustive value");
        const double adv_exact = pcd::adv_exhaustive(detected, zero, truth, all);
        pcd::Rng rng2(params.seed + 600);
        const pcd::AdvEstimate adv_sampled =
            pcd::adv(detected, zero, truth, all, 50 * all.pair_count(), rng2);
        c.require(adv_sampled.lo <= adv_exact && adv_exact <= adv_sampled.hi,
                  "sampled Adv outside CI of exhaustive value");

        // (c) per-node sets equal an independent rebuild from the traces.
        std::vector<std::set<pcd::WalkerId>> rebuilt(g.node_count());
        for (const auto& t : run.traces)
            for (std::uint32_t v : t.path) rebuilt[v].insert(t.id);
        for (std::uint32_t v = 0; v < g.node_count(); ++v) {
            const auto& got = run.sets.set_of(v);
            if (got.size() != rebuilt[v].size() ||
                !std::equal(got.begin(), got.end(), rebuilt[v].begin()))
                c.require(false, "walker sets differ from trace rebuild");
        }
    }
    if (c.ok) c.detail = std::to_string(corpus.size()) + " graphs, all oracles agree";
    return c;
}

// --- 6. determinism ----------------------------------------------------------
Check criterion_determinism() {
    Check c;
    pcd::ExperimentConfig cfg = pcd::ExperimentConfig::preset("desk");
    cfg.sampling.pairs = 1000;
    cfg.sampling.trials = 5000;
    const std::string once = pcd::run_experiment(cfg).to_json_text();
    const std::string twice = pcd::run_experiment(cfg).to_json_text();
    c.require(once == twice, "two identical runs differ");
    pcd::ExperimentConfig threaded = cfg;
    threaded.threads = 4;
    c.require(pcd::run_experiment(threaded).to_json_text() == once,
              "thread count changes the report");
    if (c.ok) c.detail = "byte-identical across reruns and thread counts";
    return c;
}

// --- 7. monotonicity ----------------------------------------------------------
Check criterion_monotonicity() {
    Check c;
    const Graph g = pcd::generate({4, 20, 0.6, 0.02, 21});
    const TrwRun run = pcd::run_trw(g, {10, 2, 22});
    double prev_fpr = 1.0, prev_fnr = 0.0;
    for (std::uint32_t t = 1; t <= 12; ++t) {
        const pcd::ErrorRates rates = pcd::empirical_error_rates(
            run.sets, {t, PsiVariant::psi_threshold}, g, 800, 23);
        c.require(rates.fpr->value <= prev_fpr, "FPR increased along the T sweep");
        c.require(rates.fnr->value >= prev_fnr, "FNR decreased along the T sweep");
        prev_fpr = rates.fpr->value;
        prev_fnr = rates.fnr->value;
    }

    BoundParams bp;
    bp.num_communities = 10;
    bp.community_size = 50;
    bp.walkers_per_node = 20;
    bp.ttl = 3;
    bp.phi = 0.2;
    bp.visit_prob = 0.05; // mu = 50
    double prev = 1e300;
    for (std::uint32_t t = 1; t <= 40; ++t) {
        bp.threshold = t;
        const double v = pcd::fpr_bound(bp).raw;
        c.require(v < prev, "fpr_bound not decreasing in T");
        prev = v;
    }
    prev = 0.0;
    for (std::uint32_t t = 1; t < 50; ++t) {
        bp.threshold = t;
        const double v = pcd::fnr_bound(bp).raw;
        c.require(v > prev, "fnr_bound not increasing in T below mu");
        prev = v;
    }
    bp.threshold = 5;
    prev = 1e300;
    for (std::uint32_t k = 2; k <= 30; ++k) {
        bp.num_communities = k;
        const double v = pcd::adv_bound(bp).raw;
        c.require(v < prev, "adv_bound not decreasing in K");
        prev = v;
    }
    if (c.ok) c.detail = "rate sweep and bound grids all monotone";
    return c;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Check()> fn;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "advantage-bound reproduction", 1.0, criterion_advantage_bound},
        {2, "bound inversions and estimator consistency", 60.0, criterion_inversions},
        {3, "desk-scale error rates vs bounds", 120.0, criterion_desk_error_rates},
        {4, "leakage hierarchy", 300.0, criterion_leakage_hierarchy},
        {5, "oracle equivalence suite", 60.0, criterion_oracle_equivalence},
        {6, "determinism", 180.0, criterion_determinism},
        {7, "monotonicity properties", 60.0, criterion_monotonicity},
    };

    int only = 0;
    if (argc == 3 && std::string(argv[1]) == "--criterion") only = std::atoi(argv[2]);

    bool all_ok = true;
    for (const auto& criterion : criteria) {
        if (only && criterion.id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            check = criterion.fn();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > criterion.budget_seconds) {
            check.ok = false;
            check.detail += "; exceeded budget of " + std::to_string(criterion.budget_seconds) +
                            "s";
        }
        std::printf("[%s] criterion %d: %s (%.2fs) %s\n", check.ok ? "PASS" : "FAIL",
                    criterion.id, criterion.name, elapsed,
                    check.detail.empty() ? "" : ("- " + check.detail).c_str());
        all_ok = all_ok && check.ok;
    }
    return all_ok ? 0 : 1;
}
