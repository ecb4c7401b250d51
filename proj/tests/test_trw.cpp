#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "pcd/cbrg.hpp"
#include "pcd/errors.hpp"
#include "pcd/trw.hpp"

using namespace pcd;

namespace {

// Independent reconstruction of the per-node sets, bypassing the library's
// builder: unordered accumulation into std::set.
std::vector<std::set<WalkerId>> brute_force_sets(std::uint32_t n,
                                                 const std::vector<WalkerTrace>& traces) {
    std::vector<std::set<WalkerId>> sets(n);
    for (const auto& t : traces)
        for (std::uint32_t v : t.path) sets[v].insert(t.id);
    return sets;
}

} // namespace

TEST(TrwParams, RejectsZeroWalkers) {
    EXPECT_THROW(TrwParams({0, 1, 1}).validate(), std::invalid_argument);
    EXPECT_NO_THROW(TrwParams({1, 0, 1}).validate()); // L = 0 is a valid degenerate walk
}

TEST(TrwRunTrw, TtlZeroMeansNoHops) {
    const Graph g = generate({2, 2, 1.0, 0.0, 1});
    const TrwRun run = run_trw(g, {3, 0, 5});
    ASSERT_EQ(run.traces.size(), 12u);
    for (const auto& t : run.traces) EXPECT_EQ(t.path.size(), 1u);
    for (std::uint32_t v = 0; v < 4; ++v) {
        EXPECT_EQ(run.sets.set_of(v).size(), 3u);
        ASSERT_EQ(run.transcripts[v].size(), 3u);
        for (const auto& ev : run.transcripts[v]) {
            EXPECT_EQ(ev.sender, kSelfSender);
            EXPECT_EQ(ev.ttl_on_arrival, 0u);
        }
    }
    EXPECT_EQ(intersection_size(run.sets, 0, 1), 0u); // no walker leaves its issuer
}

TEST(TrwRunTrw, TwoNodeForcedHop) {
    // Single community of two adjacent nodes: each walker's only move is to
    // the other node, so both sets contain both walker ids.
    const Graph g = generate({1, 2, 1.0, 0.0, 1});
    const TrwRun run = run_trw(g, {1, 1, 9});
    ASSERT_EQ(run.traces.size(), 2u);
    EXPECT_EQ(run.traces[0].path, (std::vector<std::uint32_t>{0, 1}));
    EXPECT_EQ(run.traces[1].path, (std::vector<std::uint32_t>{1, 0}));
    EXPECT_EQ(intersection_size(run.sets, 0, 1), 2u);
    EXPECT_EQ(intersection_size(run.sets, 0, 0), run.sets.set_of(0).size());
}

TEST(TrwRunTrw, DegreeZeroNodesTruncateWalks) {
    const Graph g = generate({2, 3, 0.0, 0.0, 4});
    const TrwRun run = run_trw(g, {2, 5, 11});
    for (const auto& t : run.traces) EXPECT_EQ(t.path.size(), 1u);
    for (std::uint32_t v = 0; v < g.node_count(); ++v)
        EXPECT_EQ(run.sets.set_of(v).size(), 2u);
}

TEST(TrwRunTrw, SetsMatchBruteForceRebuild) {
    const Graph g = generate({3, 10, 0.6, 0.05, 21});
    const TrwRun run = run_trw(g, {5, 3, 22});
    const auto expect = brute_force_sets(g.node_count(), run.traces);
    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
        const auto& got = run.sets.set_of(v);
        ASSERT_EQ(got.size(), expect[v].size()) << "node " << v;
        EXPECT_TRUE(std::equal(got.begin(), got.end(), expect[v].begin()));
        EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
    }
    EXPECT_EQ(run.sets, sets_from_traces(g.node_count(), run.traces));
}

TEST(TrwRunTrw, PathsAreWalksOnTheGraph) {
    const CbrgParams params{3, 10, 0.6, 0.05, 31};
    const Graph g = generate(params);
    const TrwParams trw{5, 3, 32};
    const TrwRun run = run_trw(g, trw);
    for (const auto& t : run.traces) {
        ASSERT_GE(t.path.size(), 1u);
        ASSERT_LE(t.path.size(), static_cast<std::size_t>(trw.ttl) + 1);
        EXPECT_EQ(t.path.front(), t.issuer);
        for (std::size_t h = 1; h < t.path.size(); ++h)
            EXPECT_TRUE(g.has_edge(t.path[h - 1], t.path[h]));
        // Early halt only happens when the walker is stranded.
        if (t.path.size() < static_cast<std::size_t>(trw.ttl) + 1)
            EXPECT_EQ(g.degree(t.path.back()), 0u);
    }
}

TEST(TrwRunTrw, EventConservation) {
    const Graph g = generate({3, 10, 0.6, 0.05, 41});
    const TrwParams trw{5, 3, 42};
    const TrwRun run = run_trw(g, trw);
    const std::uint64_t n = g.node_count();
    std::uint64_t self_events = 0, other_events = 0, hops = 0;
    for (const auto& transcript : run.transcripts)
        for (const auto& ev : transcript)
            ev.sender == kSelfSender ? ++self_events : ++other_events;
    for (const auto& t : run.traces) hops += t.path.size() - 1;
    EXPECT_EQ(self_events, n * trw.walkers_per_node);
    EXPECT_EQ(other_events, hops);
    EXPECT_LE(other_events, n * trw.walkers_per_node * trw.ttl);
    // Per-node SELF count is exactly W.
    for (const auto& transcript : run.transcripts) {
        std::uint64_t self = 0;
        for (const auto& ev : transcript)
            if (ev.sender == kSelfSender) ++self;
        EXPECT_EQ(self, trw.walkers_per_node);
    }
}

TEST(TrwRunTrw, DeterministicAcrossThreadCounts) {
    const Graph g = generate({4, 12, 0.5, 0.03, 51});
    const TrwParams trw{6, 3, 52};
    const TrwRun a = run_trw(g, trw, 1);
    const TrwRun b = run_trw(g, trw, 4);
    const TrwRun c = run_trw(g, trw, 1);
    EXPECT_EQ(a.traces, b.traces);
    EXPECT_EQ(a.traces, c.traces);
    EXPECT_EQ(a.sets, b.sets);
    EXPECT_EQ(a.transcripts, b.transcripts);
}

TEST(TrwRunTrw, WalkerIdsDistinctAndSeedKeyed) {
    const Graph g = generate({3, 10, 0.6, 0.05, 61});
    const TrwRun run = run_trw(g, {50, 2, 62});
    std::set<WalkerId> ids;
    for (const auto& t : run.traces) ids.insert(t.id);
    EXPECT_EQ(ids.size(), run.traces.size());
    // A different seed relabels every walker.
    const TrwRun other = run_trw(g, {50, 2, 63});
    for (const auto& t : other.traces) EXPECT_EQ(ids.count(t.id), 0u);
}

TEST(TrwTranscripts, CanonicallySortedByWalkerAndHop) {
    const Graph g = generate({2, 10, 0.8, 0.1, 71});
    const TrwParams trw{4, 3, 72};
    const TrwRun run = run_trw(g, trw);
    for (const auto& transcript : run.transcripts) {
        for (std::size_t k = 1; k < transcript.size(); ++k) {
            const auto& prev = transcript[k - 1];
            const auto& cur = transcript[k];
            const auto prev_key = std::make_pair(prev.walker, trw.ttl - prev.ttl_on_arrival);
            const auto cur_key = std::make_pair(cur.walker, trw.ttl - cur.ttl_on_arrival);
            EXPECT_LT(prev_key, cur_key);
        }
    }
    EXPECT_EQ(run.transcripts, transcripts_from_traces(g.node_count(), trw.ttl, run.traces));
}

TEST(TrwLocality, AllIntraWhenCommunitiesAreClosed) {
    const Graph g = generate({2, 10, 1.0, 0.0, 81});
    const TrwRun run = run_trw(g, {4, 3, 82});
    const LocalityStats stats = locality_stats(run.traces, g);
    ASSERT_EQ(stats.intra_fraction.size(), 3u);
    for (double f : stats.intra_fraction) EXPECT_DOUBLE_EQ(f, 1.0);
    for (double e : stats.escape_rate) EXPECT_DOUBLE_EQ(e, 0.0);
    EXPECT_DOUBLE_EQ(stats.intra_event_fraction, 1.0);
}

TEST(TrwLocality, SingleCommunityIsIntraByDefinition) {
    const Graph g = generate({1, 20, 0.3, 0.0, 91});
    const TrwRun run = run_trw(g, {4, 3, 92});
    EXPECT_DOUBLE_EQ(locality_stats(run.traces, g).intra_event_fraction, 1.0);
}

TEST(TrwLocality, WalksStayMostlyInsideTheIssuerCommunity) {
    // CBRG(4, 50, 0.5, 0.002): expected hop-1 intra fraction is
    // p(c-1) / (p(c-1) + q(K-1)c) = 24.5 / 24.8 = 0.987903...
    double hop1_sum = 0.0;
    std::vector<double> hop_avg(3, 0.0);
    double event_fraction_min = 1.0;
    const int seeds = 20;
    for (int s = 1; s <= seeds; ++s) {
        const Graph g = generate({4, 50, 0.5, 0.002, static_cast<std::uint64_t>(s)});
        const TrwRun run = run_trw(g, {20, 3, static_cast<std::uint64_t>(1000 + s)});
        const LocalityStats stats = locality_stats(run.traces, g);
        ASSERT_EQ(stats.intra_fraction.size(), 3u);
        hop1_sum += stats.intra_fraction[0];
        for (int h = 0; h < 3; ++h) hop_avg[h] += stats.intra_fraction[h];
        event_fraction_min = std::min(event_fraction_min, stats.intra_event_fraction);
    }
    EXPECT_NEAR(hop1_sum / seeds, 0.987903, 0.01);
    // Hop-wise intra fraction decays...
    EXPECT_GT(hop_avg[0], hop_avg[1]);
    EXPECT_GT(hop_avg[1], hop_avg[2]);
    // ...but the walk still lands overwhelmingly in the issuer's community.
    EXPECT_GE(event_fraction_min, 0.90);
}

TEST(TrwDumps, TraceRoundTrip) {
    const Graph g = generate({2, 5, 0.7, 0.1, 95});
    const TrwRun run = run_trw(g, {3, 2, 96});
    std::stringstream buffer;
    dump_traces(run.traces, buffer);
    const std::vector<WalkerTrace> reloaded = load_traces(buffer);
    EXPECT_EQ(reloaded, run.traces);

    std::stringstream sets;
    dump_walker_sets(run.sets, sets);
    EXPECT_FALSE(sets.str().empty());
}

TEST(TrwWalkerId, HexRoundTripAndValidation) {
    const WalkerId id = make_walker_id(123, 45, 6);
    EXPECT_EQ(walker_id_from_hex(walker_id_hex(id)), id);
    EXPECT_THROW(walker_id_from_hex("zz"), ParseError);
    EXPECT_THROW(walker_id_from_hex(std::string(32, 'g')), ParseError);
}
