#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcd/psi.hpp"
#include "pcd/rng.hpp"

using namespace pcd;

namespace {

std::vector<WalkerId> ids(std::initializer_list<std::uint64_t> values) {
    std::vector<WalkerId> out;
    for (std::uint64_t v : values) out.push_back({0, v});
    std::sort(out.begin(), out.end());
    return out;
}

// Independent oracle: quadratic scan over unsorted copies.
std::size_t brute_force_intersection(std::vector<WalkerId> a, std::vector<WalkerId> b) {
    std::size_t count = 0;
    for (const auto& x : a)
        for (const auto& y : b)
            if (x == y) ++count;
    return count;
}

std::vector<WalkerId> random_set(Rng& rng, std::size_t max_size) {
    // Small universe to force overlaps.
    std::set<WalkerId> out;
    const std::size_t size = rng.below(static_cast<std::uint32_t>(max_size + 1));
    while (out.size() < size) out.insert({1, rng.below(64)});
    return {out.begin(), out.end()};
}

} // namespace

TEST(Psi, DecisionBitMatchesThreshold) {
    const auto a = ids({1, 2, 3});
    const auto b = ids({2, 3, 4});
    for (PsiVariant v : {PsiVariant::plain_exchange, PsiVariant::hashed_exchange,
                         PsiVariant::psi_set, PsiVariant::psi_cardinality,
                         PsiVariant::psi_threshold}) {
        EXPECT_TRUE(run_psi(v, a, b, 2).decision) << to_string(v);
        EXPECT_FALSE(run_psi(v, a, b, 3).decision) << to_string(v);
    }
}

TEST(Psi, RejectsDegenerateThreshold) {
    const auto a = ids({1});
    EXPECT_THROW(run_psi(PsiVariant::psi_threshold, a, a, 0), std::invalid_argument);
}

TEST(Psi, SetVariantLeaksExactlyTheIntersection) {
    const auto a = ids({1, 2, 3});
    const auto b = ids({2, 3, 4});
    const PsiOutcome outcome = run_psi(PsiVariant::psi_set, a, b, 1);
    EXPECT_TRUE(outcome.decision);
    const auto& leak = std::get<SetLeakage>(outcome.leakage);
    EXPECT_EQ(leak.intersection, ids({2, 3}));
    EXPECT_FALSE(leak.hashed_elements);
}

TEST(Psi, CardinalityVariantLeaksOnlyTheCount) {
    const PsiOutcome outcome = run_psi(PsiVariant::psi_cardinality, ids({1, 2, 3}), ids({2, 3, 4}), 1);
    EXPECT_EQ(std::get<CardinalityLeakage>(outcome.leakage).size, 2u);
    EXPECT_EQ(leakage_audit(outcome).bits, 64u);
}

TEST(Psi, PlainVariantExposesBothInputs) {
    const auto a = ids({1, 2, 3});
    const auto b = ids({2, 3, 4});
    const PsiOutcome outcome = run_psi(PsiVariant::plain_exchange, a, b, 1);
    const auto& leak = std::get<PlainLeakage>(outcome.leakage);
    EXPECT_EQ(leak.set_i, a);
    EXPECT_EQ(leak.set_j, b);
}

TEST(Psi, ThresholdVariantLeaksExactlyOneBit) {
    const PsiOutcome outcome = run_psi(PsiVariant::psi_threshold, ids({1, 2}), ids({2, 3}), 1);
    EXPECT_EQ(leakage_audit(outcome).bits, 1u);
    const nlohmann::ordered_json rec = serialize_transcript(outcome, 5, 9);
    EXPECT_EQ(rec.at("variant"), "psi-threshold");
    EXPECT_EQ(rec.at("payload").size(), 1u);
    EXPECT_EQ(rec.at("payload").at("bit"), 1);
}

TEST(Psi, DecisionAgreesWithBruteForceOracle) {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto a = random_set(rng, 20);
        const auto b = random_set(rng, 20);
        const std::uint32_t t = 1 + rng.below(8);
        const bool expected = brute_force_intersection(a, b) >= t;
        for (PsiVariant v : {PsiVariant::plain_exchange, PsiVariant::hashed_exchange,
                             PsiVariant::psi_set, PsiVariant::psi_cardinality,
                             PsiVariant::psi_threshold})
            ASSERT_EQ(run_psi(v, a, b, t).decision, expected);
    }
}

TEST(Psi, WeakenDerivesEachWeakerTranscript) {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_set(rng, 16);
        const auto b = random_set(rng, 16);
        const std::uint32_t t = 1 + rng.below(5);

        const PsiOutcome plain = run_psi(PsiVariant::plain_exchange, a, b, t);
        const PsiOutcome hashed = weaken(plain);
        ASSERT_EQ(hashed.variant, PsiVariant::hashed_exchange);
        EXPECT_EQ(hashed.leakage, run_psi(PsiVariant::hashed_exchange, a, b, t).leakage);

        // The set transcript derived from hashed leakage holds the hash
        // image of the true intersection.
        const PsiOutcome derived_set = weaken(hashed);
        ASSERT_EQ(derived_set.variant, PsiVariant::psi_set);
        const auto& derived = std::get<SetLeakage>(derived_set.leakage);
        EXPECT_TRUE(derived.hashed_elements);
        const PsiOutcome raw_set = run_psi(PsiVariant::psi_set, a, b, t);
        std::vector<WalkerId> expected_image;
        for (const auto& id : std::get<SetLeakage>(raw_set.leakage).intersection)
            expected_image.push_back(hash_id(id));
        std::sort(expected_image.begin(), expected_image.end());
        EXPECT_EQ(derived.intersection, expected_image);

        const PsiOutcome card = weaken(derived_set);
        ASSERT_EQ(card.variant, PsiVariant::psi_cardinality);
        EXPECT_EQ(card.leakage, run_psi(PsiVariant::psi_cardinality, a, b, t).leakage);

        const PsiOutcome bit = weaken(card);
        ASSERT_EQ(bit.variant, PsiVariant::psi_threshold);
        EXPECT_EQ(bit.leakage, run_psi(PsiVariant::psi_threshold, a, b, t).leakage);
        EXPECT_EQ(std::get<ThresholdLeakage>(bit.leakage).bit, plain.decision);

        EXPECT_THROW(weaken(bit), std::invalid_argument);
    }
}

TEST(Psi, HashIsConsistentAndCollisionFreeOnTheTestUniverse) {
    std::vector<WalkerId> images;
    Rng rng(31337);
    for (int k = 0; k < 100000; ++k) {
        const WalkerId id{rng.next(), rng.next()};
        const WalkerId h = hash_id(id);
        ASSERT_EQ(h, hash_id(id));
        ASSERT_NE(h, id);
        images.push_back(h);
    }
    std::sort(images.begin(), images.end());
    EXPECT_EQ(std::adjacent_find(images.begin(), images.end()), images.end());
}

TEST(Psi, HashedExchangePreservesIntersectionSizes) {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_set(rng, 20);
        const auto b = random_set(rng, 20);
        const PsiOutcome outcome = run_psi(PsiVariant::hashed_exchange, a, b, 1);
        const auto& leak = std::get<HashedLeakage>(outcome.leakage);
        ASSERT_EQ(intersection_count(leak.hashed_i, leak.hashed_j),
                  brute_force_intersection(a, b));
    }
}

TEST(Psi, VariantNamesRoundTrip) {
    for (PsiVariant v : {PsiVariant::plain_exchange, PsiVariant::hashed_exchange,
                         PsiVariant::psi_set, PsiVariant::psi_cardinality,
                         PsiVariant::psi_threshold})
        EXPECT_EQ(psi_variant_from_string(to_string(v)), v);
    EXPECT_THROW(psi_variant_from_string("psi-bogus"), std::invalid_argument);
}
