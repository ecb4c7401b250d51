#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pcd/cbrg.hpp"

namespace pcd {

struct TrwParams {
    std::uint32_t walkers_per_node = 1; // W
    std::uint32_t ttl = 0;              // L, counted in edges; paths hold up to L+1 nodes
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TrwParams&) const = default;
};

// Opaque 128-bit walker identifier. Generated by a seed-keyed Feistel
// permutation of (issuer, index), so all ids are distinct and carry no
// structure recoverable without the seed. Honest protocol logic never
// parses an id.
struct WalkerId {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    auto operator<=>(const WalkerId&) const = default;
};

WalkerId make_walker_id(std::uint64_t seed, std::uint32_t issuer, std::uint32_t index);

std::string walker_id_hex(const WalkerId& id);
WalkerId walker_id_from_hex(const std::string& hex); // throws ParseError

// Ground-truth walk path. Visible to oracles and to attack models that are
// given raw sets; never consumed by honest protocol decisions.
struct WalkerTrace {
    WalkerId id;
    std::uint32_t issuer = 0;
    std::vector<std::uint32_t> path; // path[0] == issuer, consecutive entries adjacent

    bool operator==(const WalkerTrace&) const = default;
};

// Sender value marking a node's own issuance event.
inline constexpr std::uint32_t kSelfSender = 0xffffffffu;

struct ArrivalEvent {
    WalkerId walker;
    std::uint32_t ttl_on_arrival = 0; // L on issuance, decremented per hop
    std::uint32_t sender = kSelfSender;

    bool operator==(const ArrivalEvent&) const = default;
};

// Per-node arrival log, canonically ordered by (walker id, hop) so the
// transcript does not depend on simulation scheduling.
using NodeTranscript = std::vector<ArrivalEvent>;

// Per-node accumulated walker-id sets; a revisiting walker is recorded once.
class WalkerSets {
  public:
    WalkerSets() = default;
    explicit WalkerSets(std::vector<std::vector<WalkerId>> sets) : sets_(std::move(sets)) {}

    std::uint32_t node_count() const { return static_cast<std::uint32_t>(sets_.size()); }

    // Sorted ascending, unique.
    const std::vector<WalkerId>& set_of(std::uint32_t v) const;

    std::size_t total_entries() const;

    bool operator==(const WalkerSets&) const = default;

  private:
    std::vector<std::vector<WalkerId>> sets_;
};

struct TrwRun {
    WalkerSets sets;
    std::vector<WalkerTrace> traces;         // indexed issuer * W + k
    std::vector<NodeTranscript> transcripts; // indexed by node
};

// Simulates the pre-processing stage: every node issues walkers_per_node
// walkers with the configured TTL; the issuer records each of its own
// walkers, then while TTL > 0 and the current node has a neighbor the walker
// moves to a uniformly random neighbor (the sender is not excluded) and the
// receiving node records it. Deterministic for fixed (graph, seed) and
// independent of the thread count: each walker draws from a stream derived
// from (seed, walker id).
TrwRun run_trw(const Graph& g, const TrwParams& params, unsigned threads = 1);

// |set(i) ∩ set(j)|, exact. The trusted oracle PSI engines are tested against.
std::size_t intersection_size(const WalkerSets& ws, std::uint32_t i, std::uint32_t j);

std::size_t intersection_count(std::span<const WalkerId> a, std::span<const WalkerId> b);

// Early-exit check for |a ∩ b| >= threshold on sorted inputs.
bool intersection_at_least(std::span<const WalkerId> a, std::span<const WalkerId> b,
                           std::size_t threshold);

// Reference reconstructions from ground-truth traces; run_trw's outputs must
// match these exactly.
WalkerSets sets_from_traces(std::uint32_t node_count, std::span<const WalkerTrace> traces);
std::vector<NodeTranscript> transcripts_from_traces(std::uint32_t node_count, std::uint32_t ttl,
                                                    std::span<const WalkerTrace> traces);

struct LocalityStats {
    // intra_fraction[h-1]: fraction of hop-h positions lying in the issuer's
    // community, for h = 1..L. Empty when no walker made a hop.
    std::vector<double> intra_fraction;
    // escape_rate[h-1]: among hop-h transitions starting inside the issuer's
    // community, the fraction that left it.
    std::vector<double> escape_rate;
    // All non-SELF arrival events landing in the issuer's community.
    double intra_event_fraction = 0.0;
};

LocalityStats locality_stats(std::span<const WalkerTrace> traces, const Graph& g);

// Debug/oracle dumps, one line per walker (`id issuer: v0 v1 ...`) and one
// line per node (`node: sorted ids`). Not protocol messages.
void dump_traces(std::span<const WalkerTrace> traces, std::ostream& out);
void dump_walker_sets(const WalkerSets& ws, std::ostream& out);
std::vector<WalkerTrace> load_traces(std::istream& in); // throws ParseError

} // namespace pcd
