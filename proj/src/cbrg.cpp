#include "pcd/cbrg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pcd/errors.hpp"
#include "pcd/rng.hpp"

namespace pcd {

namespace {

constexpr std::uint64_t kCbrgStreamTag = 0x43425247; // block stream domain

// Dense blocks draw one Bernoulli per pair; sparser ones skip between edges
// geometrically. Both produce the same distribution.
constexpr double kSkipSamplingCutoff = 0.25;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Emits the linear pair indices that become edges within one block.
template <class Emit>
void sample_block(Rng& rng, std::uint64_t total_pairs, double prob, Emit&& emit) {
    if (prob <= 0.0 || total_pairs == 0) return;
    if (prob >= 1.0) {
        for (std::uint64_t t = 0; t < total_pairs; ++t) emit(t);
        return;
    }
    if (prob >= kSkipSamplingCutoff) {
        for (std::uint64_t t = 0; t < total_pairs; ++t)
            if (rng.bernoulli(prob)) emit(t);
        return;
    }
    const double log1mp = std::log1p(-prob);
    std::uint64_t t = geometric_skip(rng, log1mp);
    while (t < total_pairs) {
        emit(t);
        const std::uint64_t gap = geometric_skip(rng, log1mp);
        if (gap >= total_pairs - t) break;
        t += 1 + gap;
    }
}

// Decodes linear index t into the pair (i, j), i < j, over c nodes in
// lexicographic order.
std::pair<std::uint32_t, std::uint32_t> triangular_pair(std::uint64_t t, std::uint32_t c) {
    const double cd = c;
    double approx = std::floor((2 * cd - 1 - std::sqrt((2 * cd - 1) * (2 * cd - 1) - 8.0 * static_cast<double>(t))) / 2);
    auto row_start = [&](std::uint64_t i) { return i * (2 * static_cast<std::uint64_t>(c) - i - 1) / 2; };
    std::uint64_t i = approx < 0 ? 0 : static_cast<std::uint64_t>(approx);
    while (i > 0 && row_start(i) > t) --i;
    while (row_start(i + 1) <= t) ++i;
    const std::uint64_t j = i + 1 + (t - row_start(i));
    return {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
}

} // namespace

void CbrgParams::validate() const {
    if (num_communities < 1) throw std::invalid_argument("cbrg: K must be >= 1");
    if (community_size < 1) throw std::invalid_argument("cbrg: c must be >= 1");
    if (!(intra_prob >= 0.0 && intra_prob <= 1.0))
        throw std::invalid_argument("cbrg: p must lie in [0, 1]");
    if (!(inter_prob >= 0.0 && inter_prob <= 1.0))
        throw std::invalid_argument("cbrg: q must lie in [0, 1]");
    if (static_cast<std::uint64_t>(num_communities) * community_size > 0x7fffffffULL)
        throw std::invalid_argument("cbrg: K*c exceeds the supported node count");
}

Graph::Graph(CbrgParams params, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges)
    : params_(params) {
    params_.validate();
    const std::uint32_t n = params_.node_count();
    std::vector<std::uint64_t> deg(n, 0);
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) throw std::invalid_argument("graph: edge endpoint out of range");
        if (u == v) throw std::invalid_argument("graph: self-loop");
        ++deg[u];
        ++deg[v];
    }
    offsets_.assign(n + 1, 0);
    for (std::uint32_t v = 0; v < n; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
    targets_.resize(offsets_[n]);
    std::vector<std::uint64_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [u, v] : edges) {
        targets_[cursor[u]++] = v;
        targets_[cursor[v]++] = u;
    }
    for (std::uint32_t v = 0; v < n; ++v) {
        auto first = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]);
        auto last = targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]);
        std::sort(first, last);
        if (std::adjacent_find(first, last) != last)
            throw std::invalid_argument("graph: duplicate edge");
    }
}

void Graph::check_node(std::uint32_t v) const {
    if (v >= node_count()) throw std::out_of_range("graph: node index out of range");
}

bool Graph::has_edge(std::uint32_t i, std::uint32_t j) const {
    auto nb = neighbors(i);
    check_node(j);
    return std::binary_search(nb.begin(), nb.end(), j);
}

void Graph::check_invariants() const {
    const std::uint32_t n = node_count();
    for (std::uint32_t v = 0; v < n; ++v) {
        auto nb = neighbors(v);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (nb[k] == v) throw InvariantViolation("graph: self-loop at node " + std::to_string(v));
            if (k > 0 && nb[k] <= nb[k - 1])
                throw InvariantViolation("graph: unsorted or duplicate neighbor at node " +
                                         std::to_string(v));
            if (!has_edge(nb[k], v))
                throw InvariantViolation("graph: asymmetric edge " + std::to_string(v) + "-" +
                                         std::to_string(nb[k]));
        }
    }
}

Graph generate(const CbrgParams& params) {
    params.validate();
    const std::uint32_t k = params.num_communities;
    const std::uint32_t c = params.community_size;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    const double expected =
        static_cast<double>(k) * c * (c - 1) / 2 * params.intra_prob +
        static_cast<double>(k) * (k - 1) / 2 * static_cast<double>(c) * c * params.inter_prob;
    edges.reserve(static_cast<std::size_t>(expected * 1.05) + 64);

    for (std::uint32_t a = 0; a < k; ++a) {
        for (std::uint32_t b = a; b < k; ++b) {
            const std::uint64_t block_id = static_cast<std::uint64_t>(a) * k + b;
            Rng rng(derive(params.seed, kCbrgStreamTag, block_id));
            const std::uint32_t base_a = a * c;
            const std::uint32_t base_b = b * c;
            if (a == b) {
                const std::uint64_t pairs = static_cast<std::uint64_t>(c) * (c - 1) / 2;
                sample_block(rng, pairs, params.intra_prob, [&](std::uint64_t t) {
                    auto [i, j] = triangular_pair(t, c);
                    edges.emplace_back(base_a + i, base_a + j);
                });
            } else {
                const std::uint64_t pairs = static_cast<std::uint64_t>(c) * c;
                sample_block(rng, pairs, params.inter_prob, [&](std::uint64_t t) {
                    edges.emplace_back(base_a + static_cast<std::uint32_t>(t / c),
                                       base_b + static_cast<std::uint32_t>(t % c));
                });
            }
        }
    }
    return Graph(params, edges);
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    const CbrgParams& p = g.params();
    out << "cbrg v1 n=" << g.node_count() << " K=" << p.num_communities << " c="
        << p.community_size << " p=" << format_double(p.intra_prob) << " q="
        << format_double(p.inter_prob) << " seed=" << p.seed << "\n";
    for (std::uint32_t v = 0; v < g.node_count(); ++v) {
        out << v << ":";
        for (std::uint32_t w : g.neighbors(v)) out << ' ' << w;
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::uint64_t parse_u64_field(const std::string& token, const std::string& key, std::size_t line) {
    if (token.rfind(key + "=", 0) != 0)
        throw ParseError("graph header: expected " + key + "=<value>, got '" + token + "'", line);
    const std::string value = token.substr(key.size() + 1);
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParseError("graph header: bad integer for " + key + ": '" + value + "'", line);
    }
}

double parse_double_field(const std::string& token, const std::string& key, std::size_t line) {
    if (token.rfind(key + "=", 0) != 0)
        throw ParseError("graph header: expected " + key + "=<value>, got '" + token + "'", line);
    const std::string value = token.substr(key.size() + 1);
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParseError("graph header: bad number for " + key + ": '" + value + "'", line);
    }
}

} // namespace

Graph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty graph file", 1);
    std::istringstream header(line);
    std::string magic, version, tok_n, tok_k, tok_c, tok_p, tok_q, tok_seed;
    header >> magic >> version >> tok_n >> tok_k >> tok_c >> tok_p >> tok_q >> tok_seed;
    if (magic != "cbrg" || version != "v1")
        throw ParseError("graph header: expected 'cbrg v1'", 1);
    const std::uint64_t n = parse_u64_field(tok_n, "n", 1);
    CbrgParams params;
    params.num_communities = static_cast<std::uint32_t>(parse_u64_field(tok_k, "K", 1));
    params.community_size = static_cast<std::uint32_t>(parse_u64_field(tok_c, "c", 1));
    params.intra_prob = parse_double_field(tok_p, "p", 1);
    params.inter_prob = parse_double_field(tok_q, "q", 1);
    params.seed = parse_u64_field(tok_seed, "seed", 1);
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("graph header: ") + e.what(), 1);
    }
    if (n != params.node_count())
        throw ParseError("graph header: n does not equal K*c", 1);

    std::vector<std::vector<std::uint32_t>> adj(n);
    std::size_t line_no = 1;
    std::uint32_t expected_node = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (expected_node >= n)
            throw ParseError("graph body: more node lines than header n=" + std::to_string(n),
                             line_no);
        std::istringstream row(line);
        std::string id_tok;
        row >> id_tok;
        if (id_tok.empty() || id_tok.back() != ':')
            throw ParseError("graph body: expected '<node>:' prefix", line_no);
        std::uint64_t node = 0;
        try {
            std::size_t pos = 0;
            node = std::stoull(id_tok.substr(0, id_tok.size() - 1), &pos);
            if (pos != id_tok.size() - 1) throw std::invalid_argument(id_tok);
        } catch (const std::exception&) {
            throw ParseError("graph body: bad node id '" + id_tok + "'", line_no);
        }
        if (node != expected_node)
            throw ParseError("graph body: expected node " + std::to_string(expected_node) +
                                 ", got " + std::to_string(node),
                             line_no);
        std::uint64_t w = 0;
        while (row >> w) {
            if (w >= n) throw ParseError("graph body: neighbor id out of range", line_no);
            if (w == node) throw ParseError("graph body: self-loop", line_no);
            adj[node].push_back(static_cast<std::uint32_t>(w));
        }
        if (!row.eof()) throw ParseError("graph body: trailing garbage", line_no);
        ++expected_node;
    }
    if (expected_node != n)
        throw ParseError("graph body: header says n=" + std::to_string(n) + " but file lists " +
                             std::to_string(expected_node) + " nodes",
                         line_no + 1);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::uint32_t v = 0; v < n; ++v) {
        const auto& nb = adj[v];
        for (std::size_t i = 0; i < nb.size(); ++i) {
            if (i > 0 && nb[i] <= nb[i - 1])
                throw ParseError("graph body: neighbors of node " + std::to_string(v) +
                                     " not sorted strictly ascending",
                                 v + 2);
            const std::uint32_t w = nb[i];
            if (!std::binary_search(adj[w].begin(), adj[w].end(), v))
                throw ParseError("graph body: asymmetric adjacency " + std::to_string(v) + "-" +
                                     std::to_string(w),
                                 v + 2);
            if (v < w) edges.emplace_back(v, w);
        }
    }
    return Graph(params, edges);
}

} // namespace pcd
