#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pcd/trw.hpp"

namespace pcd {

// Disclosure level of the pairwise set comparison. Each variant is evaluated
// as an ideal functionality that emits exactly its defined leakage; the
// decision bit [|A ∩ B| >= T] is the same for all of them.
enum class PsiVariant {
    plain_exchange,
    hashed_exchange,
    psi_set,
    psi_cardinality,
    psi_threshold,
};

const char* to_string(PsiVariant v);
PsiVariant psi_variant_from_string(const std::string& name); // throws std::invalid_argument

struct PlainLeakage {
    std::vector<WalkerId> set_i;
    std::vector<WalkerId> set_j;
    bool operator==(const PlainLeakage&) const = default;
};

struct HashedLeakage {
    std::vector<WalkerId> hashed_i; // sorted images under hash_id
    std::vector<WalkerId> hashed_j;
    bool operator==(const HashedLeakage&) const = default;
};

struct SetLeakage {
    std::vector<WalkerId> intersection;
    bool hashed_elements = false; // true when derived from a hashed transcript
    bool operator==(const SetLeakage&) const = default;
};

struct CardinalityLeakage {
    std::uint64_t size = 0;
    bool operator==(const CardinalityLeakage&) const = default;
};

struct ThresholdLeakage {
    bool bit = false;
    bool operator==(const ThresholdLeakage&) const = default;
};

using PsiLeakage =
    std::variant<PlainLeakage, HashedLeakage, SetLeakage, CardinalityLeakage, ThresholdLeakage>;

// What both parties (and a sniffer of either) see from one pairwise run.
struct PsiOutcome {
    bool decision = false; // [|A ∩ B| >= threshold], regardless of variant
    std::uint32_t threshold = 1;
    PsiVariant variant = PsiVariant::psi_threshold;
    PsiLeakage leakage;
};

// Ideal-functionality evaluation: inputs are the two sorted walker-id sets.
// threshold must be >= 1 (0 would make the decision degenerately true).
PsiOutcome run_psi(PsiVariant variant, std::span<const WalkerId> set_i,
                   std::span<const WalkerId> set_j, std::uint32_t threshold);

// Fixed one-way function applied elementwise by hashed_exchange. Both sides
// use the same function, so intersections are preserved as long as it is
// collision-free on the walker-id universe in play.
WalkerId hash_id(const WalkerId& id);

// Derives the next-weaker variant's transcript from a stronger one:
// plain -> hashed -> set -> cardinality -> threshold. The set transcript
// derived from a hashed one holds hashed elements (hash images cannot be
// inverted); its cardinality and everything downstream still match the
// directly computed transcripts. Throws std::invalid_argument for
// psi_threshold (nothing weaker exists).
PsiOutcome weaken(const PsiOutcome& outcome);

struct LeakageAudit {
    std::uint64_t bits = 0; // payload size exposed to an observer
    std::string summary;
};

LeakageAudit leakage_audit(const PsiOutcome& outcome);

// Transcript record `{variant, pair, payload}` for leakage audits.
nlohmann::ordered_json serialize_transcript(const PsiOutcome& outcome, std::uint32_t i,
                                            std::uint32_t j);

} // namespace pcd
