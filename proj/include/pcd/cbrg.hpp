#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pcd {

// Parameters of a community-based random graph: num_communities equal-size
// communities of community_size nodes each; an unordered pair of nodes is an
// edge independently with probability intra_prob when both nodes share a
// community and inter_prob otherwise.
struct CbrgParams {
    std::uint32_t num_communities = 1; // K
    std::uint32_t community_size = 1;  // c
    double intra_prob = 0.0;           // p
    double inter_prob = 0.0;           // q
    std::uint64_t seed = 0;

    std::uint32_t node_count() const { return num_communities * community_size; }

    // Aggregate inter-community edge pressure on one node's pair trials.
    double beta1() const { return (num_communities - 1) * inter_prob; }

    // The model degenerates when inter-community edges are more likely than
    // intra-community ones; accepted with a warning, not an error.
    bool degenerate() const { return inter_prob > intra_prob; }

    // Throws std::invalid_argument on domain violations.
    void validate() const;

    bool operator==(const CbrgParams&) const = default;
};

// Immutable simple undirected graph with the block community layout:
// node v belongs to community v / community_size. Adjacency is stored CSR,
// per-node neighbor lists sorted ascending.
class Graph {
  public:
    Graph(CbrgParams params, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

    std::uint32_t node_count() const { return params_.node_count(); }
    std::uint32_t num_communities() const { return params_.num_communities; }
    std::uint32_t community_size() const { return params_.community_size; }
    const CbrgParams& params() const { return params_; }
    std::uint64_t edge_count() const { return targets_.size() / 2; }

    std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
        check_node(v);
        return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
    }

    std::uint32_t degree(std::uint32_t v) const {
        check_node(v);
        return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
    }

    std::uint32_t community_of(std::uint32_t v) const {
        check_node(v);
        return v / params_.community_size;
    }

    // Ground-truth community encoding: 1 iff i and j share a community
    // (reflexive on the diagonal).
    bool same_community(std::uint32_t i, std::uint32_t j) const {
        return community_of(i) == community_of(j);
    }

    bool has_edge(std::uint32_t i, std::uint32_t j) const;

    // Validates symmetry, sortedness, no self-loops, no duplicates.
    // Throws InvariantViolation; used by the file loader and tests.
    void check_invariants() const;

    bool operator==(const Graph&) const = default;

  private:
    void check_node(std::uint32_t v) const;

    CbrgParams params_;
    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint32_t> targets_;
};

// Samples a graph from the model. Deterministic for fixed params (including
// seed) and independent of thread count: every community pair block draws
// from its own derived stream. Sparse blocks use geometric-gap sampling,
// which has exactly the per-pair Bernoulli distribution.
Graph generate(const CbrgParams& params);

// Text format, round-trip exact:
//   cbrg v1 n=<n> K=<K> c=<c> p=<p> q=<q> seed=<seed>
//   <node-id>: <space-separated sorted neighbor ids>
void save_graph(const Graph& g, const std::filesystem::path& path);

// Throws ParseError (with line number) on malformed files, including any
// graph invariant violation present in the file.
Graph load_graph(const std::filesystem::path& path);

} // namespace pcd
