#include "pcd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pcd/rng.hpp"

namespace pcd {

namespace {

constexpr std::uint64_t kVisitProbTag = 0x50455354;
constexpr std::uint64_t kPhiTag = 0x50484945;
constexpr std::uint64_t kCalibrateTag = 0x43414c42;

BoundValue make_bound(double raw, bool valid = true) {
    return {raw, std::clamp(raw, 0.0, 1.0), valid && raw < 1.0};
}

} // namespace

BoundValue fpr_bound(const BoundParams& bp) {
    if (bp.num_communities < 2)
        throw std::invalid_argument("fpr bound: K must be >= 2 (no inter-community pairs exist)");
    if (bp.threshold < 1) throw std::invalid_argument("fpr bound: T must be >= 1");
    const double l = bp.ttl;
    const double raw = bp.phi * bp.walkers_per_node * l * (l + 1) * (l + 1) /
                       (2.0 * (bp.num_communities - 1) * bp.threshold);
    return make_bound(raw);
}

BoundValue fnr_bound(const BoundParams& bp) {
    const double mu = bp.mu();
    if (!(mu > 0.0)) throw std::invalid_argument("fnr bound: mu = c*W*P must be positive");
    if (bp.threshold >= mu) {
        // Above the mean the exponent is non-negative; the bound says nothing.
        return {1.0, 1.0, false};
    }
    const double t = bp.threshold;
    const double raw = std::exp(-mu * (1.0 - t / mu) * (1.0 - t / mu) / 2.0);
    return make_bound(raw);
}

BoundValue adv_bound(const BoundParams& bp) {
    if (bp.num_communities < 2)
        throw std::invalid_argument("adv bound: K must be >= 2 (challenge relation is empty)");
    const double raw = 4.0 * bp.walkers_per_node * (bp.ttl + 1.0) /
                       (static_cast<double>(bp.num_communities - 1) * bp.community_size);
    return make_bound(raw);
}

double invert_phi(const BoundParams& bp, double target_fpr) {
    if (bp.num_communities < 2) throw std::invalid_argument("invert phi: K must be >= 2");
    if (bp.walkers_per_node < 1 || bp.ttl < 1)
        throw std::invalid_argument("invert phi: W and L must be >= 1");
    if (!(target_fpr > 0.0)) throw std::invalid_argument("invert phi: target must be positive");
    const double l = bp.ttl;
    return target_fpr * 2.0 * (bp.num_communities - 1) * bp.threshold /
           (bp.walkers_per_node * l * (l + 1) * (l + 1));
}

double invert_visit_prob(const BoundParams& bp, double target_fnr) {
    if (!(target_fnr > 0.0 && target_fnr < 1.0))
        throw std::invalid_argument("invert P: target must lie in (0, 1)");
    // exp(-mu (1 - T/mu)^2 / 2) = target  <=>  mu^2 - (2T + r) mu + T^2 = 0
    // with r = -2 ln(target); the root with mu > T is the valid regime.
    const double t = bp.threshold;
    const double r = -2.0 * std::log(target_fnr);
    const double b = 2.0 * t + r;
    const double disc = b * b - 4.0 * t * t;
    const double mu = (b + std::sqrt(disc)) / 2.0;
    const double denom = static_cast<double>(bp.community_size) * bp.walkers_per_node;
    if (!(denom > 0.0)) throw std::invalid_argument("invert P: c*W must be positive");
    return mu / denom;
}

Estimate estimate_visit_prob(const Graph& g, const TrwParams& params, std::uint32_t trials,
                             std::uint64_t seed) {
    params.validate();
    if (trials < 100) throw std::invalid_argument("estimate P: need at least 100 trials");
    if (g.community_size() < 2)
        throw std::invalid_argument("estimate P: community size must be >= 2");
    const std::uint32_t n = g.node_count();
    const std::uint32_t c = g.community_size();
    Rng pick(derive(seed, kVisitProbTag));
    std::uint64_t hits = 0;
    for (std::uint32_t trial = 0; trial < trials; ++trial) {
        const std::uint32_t issuer = pick.below(n);
        const std::uint32_t base = (issuer / c) * c;
        std::uint32_t target = base + pick.below(c - 1);
        if (target >= issuer) ++target;
        Rng walk(derive(seed, kVisitProbTag, trial));
        std::uint32_t cur = issuer;
        bool visited = false;
        for (std::uint32_t ttl = params.ttl; ttl > 0; --ttl) {
            const auto nb = g.neighbors(cur);
            if (nb.empty()) break;
            cur = nb[walk.below(static_cast<std::uint32_t>(nb.size()))];
            if (cur == target) {
                visited = true;
                break;
            }
        }
        if (visited) ++hits;
    }
    return wilson_estimate(hits, trials);
}

Estimate estimate_phi(const Graph& g, const WalkerSets& ws, const TrwParams& params,
                      std::uint32_t trials, std::uint64_t seed) {
    params.validate();
    if (params.ttl < 1) throw std::invalid_argument("estimate phi: L must be >= 1");
    if (trials < 1) throw std::invalid_argument("estimate phi: need at least 1 trial");
    const PairSampler inter = PairSampler::inter(g);
    if (inter.empty()) throw std::invalid_argument("estimate phi: graph has no inter pairs");

    Rng rng(derive(seed, kPhiTag));
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint32_t trial = 0; trial < trials; ++trial) {
        const auto [i, j] = inter.sample(rng);
        const double x = static_cast<double>(intersection_size(ws, i, j));
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / trials;
    const double var = trials > 1 ? (sum_sq - sum * sum / trials) / (trials - 1.0) : 0.0;
    const double half_mean = 1.96 * std::sqrt(std::max(0.0, var) / trials);

    const double l = params.ttl;
    const double scale =
        2.0 * (g.num_communities() - 1) / (params.walkers_per_node * l * (l + 1) * (l + 1));
    return {mean * scale, std::max(0.0, (mean - half_mean) * scale), (mean + half_mean) * scale,
            trials};
}

CalibrationResult calibrate_threshold(const Graph& g, const WalkerSets& ws,
                                      std::uint32_t pilot_pairs_per_class, double target_fpr,
                                      double target_fnr, std::uint64_t seed) {
    if (pilot_pairs_per_class < 1)
        throw std::invalid_argument("calibrate: pilot sample size must be >= 1");
    if (!(target_fpr >= 0.0 && target_fpr <= 1.0 && target_fnr >= 0.0 && target_fnr <= 1.0))
        throw std::invalid_argument("calibrate: targets must lie in [0, 1]");
    const PairSampler intra = PairSampler::intra(g);
    if (intra.empty())
        throw std::invalid_argument("calibrate: no intra pairs to calibrate against");

    Rng rng(derive(seed, kCalibrateTag));
    std::vector<std::size_t> intra_sizes(pilot_pairs_per_class);
    double intra_sum = 0.0;
    for (auto& x : intra_sizes) {
        const auto [i, j] = intra.sample(rng);
        x = intersection_size(ws, i, j);
        intra_sum += static_cast<double>(x);
    }
    const PairSampler inter = PairSampler::inter(g);
    std::vector<std::size_t> inter_sizes;
    if (!inter.empty()) {
        inter_sizes.resize(pilot_pairs_per_class);
        for (auto& x : inter_sizes) {
            const auto [i, j] = inter.sample(rng);
            x = intersection_size(ws, i, j);
        }
    }

    CalibrationResult result;
    result.mu_hat = intra_sum / pilot_pairs_per_class;
    const std::uint32_t t_max =
        std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::floor(result.mu_hat)));

    auto pilot_fpr = [&](std::uint32_t t) {
        if (inter_sizes.empty()) return 0.0;
        std::size_t hits = 0;
        for (std::size_t x : inter_sizes)
            if (x >= t) ++hits;
        return static_cast<double>(hits) / static_cast<double>(inter_sizes.size());
    };
    auto pilot_fnr = [&](std::uint32_t t) {
        std::size_t misses = 0;
        for (std::size_t x : intra_sizes)
            if (x < t) ++misses;
        return static_cast<double>(misses) / static_cast<double>(intra_sizes.size());
    };

    for (std::uint32_t t = 1; t <= t_max; ++t) {
        const double fpr = pilot_fpr(t);
        if (fpr <= target_fpr) {
            // FNR only grows with T, so the smallest T meeting the FPR target
            // is the only candidate for meeting both.
            const double fnr = pilot_fnr(t);
            result.threshold = t;
            result.predicted_fpr = fpr;
            result.predicted_fnr = fnr;
            result.feasible = fnr <= target_fnr;
            if (!result.feasible)
                result.note = "smallest T meeting the FPR target violates the FNR target";
            return result;
        }
    }
    result.threshold = t_max;
    result.predicted_fpr = pilot_fpr(t_max);
    result.predicted_fnr = pilot_fnr(t_max);
    result.feasible = false;
    result.note = "no T in [1, mu_hat] meets the FPR target";
    return result;
}

CalibrationResult calibrate_threshold_bound(const BoundParams& bp, double target_fpr,
                                            double target_fnr) {
    if (!(target_fpr > 0.0)) throw std::invalid_argument("calibrate: FPR target must be positive");
    const double mu = bp.mu();
    if (!(mu > 0.0)) throw std::invalid_argument("calibrate: mu = c*W*P must be positive");

    const double l = bp.ttl;
    const double coeff =
        bp.phi * bp.walkers_per_node * l * (l + 1) * (l + 1) / (2.0 * (bp.num_communities - 1));
    const std::uint32_t t0 =
        std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(coeff / target_fpr)));

    CalibrationResult result;
    result.mu_hat = mu;
    result.threshold = t0;
    BoundParams at = bp;
    at.threshold = t0;
    result.predicted_fpr = fpr_bound(at).clamped;
    result.predicted_fnr = fnr_bound(at).clamped;
    result.feasible =
        t0 < mu && result.predicted_fpr <= target_fpr && result.predicted_fnr <= target_fnr;
    if (!result.feasible) result.note = "bound-mode targets infeasible at these parameters";
    return result;
}

} // namespace pcd
