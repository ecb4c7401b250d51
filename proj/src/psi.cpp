#include "pcd/psi.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pcd/rng.hpp"

namespace pcd {

namespace {

std::vector<WalkerId> intersect_sorted(std::span<const WalkerId> a, std::span<const WalkerId> b) {
    std::vector<WalkerId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<WalkerId> hash_set(std::span<const WalkerId> s) {
    std::vector<WalkerId> out;
    out.reserve(s.size());
    for (const auto& id : s) out.push_back(hash_id(id));
    std::sort(out.begin(), out.end());
    return out;
}

nlohmann::ordered_json ids_to_json(std::span<const WalkerId> ids) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& id : ids) arr.push_back(walker_id_hex(id));
    return arr;
}

} // namespace

const char* to_string(PsiVariant v) {
    switch (v) {
    case PsiVariant::plain_exchange: return "plain-exchange";
    case PsiVariant::hashed_exchange: return "hashed-exchange";
    case PsiVariant::psi_set: return "psi-set";
    case PsiVariant::psi_cardinality: return "psi-cardinality";
    case PsiVariant::psi_threshold: return "psi-threshold";
    }
    return "?";
}

PsiVariant psi_variant_from_string(const std::string& name) {
    if (name == "plain-exchange") return PsiVariant::plain_exchange;
    if (name == "hashed-exchange") return PsiVariant::hashed_exchange;
    if (name == "psi-set") return PsiVariant::psi_set;
    if (name == "psi-cardinality") return PsiVariant::psi_cardinality;
    if (name == "psi-threshold") return PsiVariant::psi_threshold;
    throw std::invalid_argument("unknown PSI variant: '" + name + "'");
}

WalkerId hash_id(const WalkerId& id) {
    const std::uint64_t a = mix64(id.hi ^ 0x243f6a8885a308d3ULL);
    const std::uint64_t b = mix64(id.lo + 0x13198a2e03707344ULL);
    return {mix64(a + (b << 1)), mix64(b ^ (a >> 3) ^ 0xa4093822299f31d0ULL)};
}

PsiOutcome run_psi(PsiVariant variant, std::span<const WalkerId> set_i,
                   std::span<const WalkerId> set_j, std::uint32_t threshold) {
    if (threshold == 0)
        throw std::invalid_argument(
            "psi: threshold 0 makes the decision degenerately true; callers must use T >= 1");

    PsiOutcome outcome;
    outcome.threshold = threshold;
    outcome.variant = variant;
    outcome.decision = intersection_at_least(set_i, set_j, threshold);

    switch (variant) {
    case PsiVariant::plain_exchange:
        outcome.leakage = PlainLeakage{{set_i.begin(), set_i.end()}, {set_j.begin(), set_j.end()}};
        break;
    case PsiVariant::hashed_exchange:
        outcome.leakage = HashedLeakage{hash_set(set_i), hash_set(set_j)};
        break;
    case PsiVariant::psi_set:
        outcome.leakage = SetLeakage{intersect_sorted(set_i, set_j), false};
        break;
    case PsiVariant::psi_cardinality:
        outcome.leakage = CardinalityLeakage{intersection_count(set_i, set_j)};
        break;
    case PsiVariant::psi_threshold:
        outcome.leakage = ThresholdLeakage{outcome.decision};
        break;
    }
    return outcome;
}

PsiOutcome weaken(const PsiOutcome& outcome) {
    PsiOutcome weaker;
    weaker.decision = outcome.decision;
    weaker.threshold = outcome.threshold;

    if (const auto* plain = std::get_if<PlainLeakage>(&outcome.leakage)) {
        weaker.variant = PsiVariant::hashed_exchange;
        weaker.leakage = HashedLeakage{hash_set(plain->set_i), hash_set(plain->set_j)};
        return weaker;
    }
    if (const auto* hashed = std::get_if<HashedLeakage>(&outcome.leakage)) {
        weaker.variant = PsiVariant::psi_set;
        weaker.leakage = SetLeakage{intersect_sorted(hashed->hashed_i, hashed->hashed_j), true};
        return weaker;
    }
    if (const auto* set = std::get_if<SetLeakage>(&outcome.leakage)) {
        weaker.variant = PsiVariant::psi_cardinality;
        weaker.leakage = CardinalityLeakage{set->intersection.size()};
        return weaker;
    }
    if (const auto* card = std::get_if<CardinalityLeakage>(&outcome.leakage)) {
        weaker.variant = PsiVariant::psi_threshold;
        weaker.leakage = ThresholdLeakage{card->size >= outcome.threshold};
        return weaker;
    }
    throw std::invalid_argument("psi: no variant weaker than psi-threshold");
}

LeakageAudit leakage_audit(const PsiOutcome& outcome) {
    LeakageAudit audit;
    if (const auto* plain = std::get_if<PlainLeakage>(&outcome.leakage)) {
        audit.bits = 128ull * (plain->set_i.size() + plain->set_j.size());
        audit.summary = "both raw sets (" + std::to_string(plain->set_i.size()) + " + " +
                        std::to_string(plain->set_j.size()) + " ids)";
    } else if (const auto* hashed = std::get_if<HashedLeakage>(&outcome.leakage)) {
        audit.bits = 128ull * (hashed->hashed_i.size() + hashed->hashed_j.size());
        audit.summary = "both hashed sets (" + std::to_string(hashed->hashed_i.size()) + " + " +
                        std::to_string(hashed->hashed_j.size()) + " ids)";
    } else if (const auto* set = std::get_if<SetLeakage>(&outcome.leakage)) {
        audit.bits = 128ull * set->intersection.size();
        audit.summary = "intersection set (" + std::to_string(set->intersection.size()) + " ids)";
    } else if (std::holds_alternative<CardinalityLeakage>(outcome.leakage)) {
        audit.bits = 64;
        audit.summary = "intersection cardinality";
    } else {
        audit.bits = 1;
        audit.summary = "threshold bit";
    }
    return audit;
}

nlohmann::ordered_json serialize_transcript(const PsiOutcome& outcome, std::uint32_t i,
                                            std::uint32_t j) {
    nlohmann::ordered_json rec;
    rec["variant"] = to_string(outcome.variant);
    rec["pair"] = {i, j};
    nlohmann::ordered_json payload;
    if (const auto* plain = std::get_if<PlainLeakage>(&outcome.leakage)) {
        payload["set_i"] = ids_to_json(plain->set_i);
        payload["set_j"] = ids_to_json(plain->set_j);
    } else if (const auto* hashed = std::get_if<HashedLeakage>(&outcome.leakage)) {
        payload["hashed_i"] = ids_to_json(hashed->hashed_i);
        payload["hashed_j"] = ids_to_json(hashed->hashed_j);
    } else if (const auto* set = std::get_if<SetLeakage>(&outcome.leakage)) {
        payload["intersection"] = ids_to_json(set->intersection);
    } else if (const auto* card = std::get_if<CardinalityLeakage>(&outcome.leakage)) {
        payload["size"] = card->size;
    } else {
        payload["bit"] = std::get<ThresholdLeakage>(outcome.leakage).bit ? 1 : 0;
    }
    rec["payload"] = std::move(payload);
    return rec;
}

} // namespace pcd
