#include "pcd/trw.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "pcd/errors.hpp"
#include "pcd/rng.hpp"

namespace pcd {

namespace {

constexpr std::uint64_t kWalkerIdTag = 0x54525749; // walker-id Feistel key domain

std::uint32_t hop_of(std::uint32_t ttl_budget, const ArrivalEvent& ev) {
    return ttl_budget - ev.ttl_on_arrival;
}

} // namespace

void TrwParams::validate() const {
    if (walkers_per_node < 1) throw std::invalid_argument("trw: W must be >= 1");
}

WalkerId make_walker_id(std::uint64_t seed, std::uint32_t issuer, std::uint32_t index) {
    // Four Feistel rounds over the (issuer, index) block: a bijection for any
    // fixed seed, so ids never collide, while the keyed round function hides
    // the issuer from anyone without the seed.
    std::uint64_t left = issuer;
    std::uint64_t right = index;
    for (std::uint64_t round = 0; round < 4; ++round) {
        const std::uint64_t key = derive(seed, kWalkerIdTag, round);
        const std::uint64_t next = left ^ mix64(right + key);
        left = right;
        right = next;
    }
    return {left, right};
}

std::string walker_id_hex(const WalkerId& id) {
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(id.hi),
                  static_cast<unsigned long long>(id.lo));
    return buf;
}

WalkerId walker_id_from_hex(const std::string& hex) {
    if (hex.size() != 32) throw ParseError("walker id must be 32 hex digits: '" + hex + "'");
    auto parse_half = [&](const std::string& s) {
        std::size_t pos = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(s, &pos, 16);
        } catch (const std::exception&) {
            throw ParseError("bad walker id hex: '" + hex + "'");
        }
        if (pos != 16) throw ParseError("bad walker id hex: '" + hex + "'");
        return v;
    };
    return {parse_half(hex.substr(0, 16)), parse_half(hex.substr(16, 16))};
}

const std::vector<WalkerId>& WalkerSets::set_of(std::uint32_t v) const {
    if (v >= sets_.size()) throw std::out_of_range("walker sets: node index out of range");
    return sets_[v];
}

std::size_t WalkerSets::total_entries() const {
    std::size_t total = 0;
    for (const auto& s : sets_) total += s.size();
    return total;
}

TrwRun run_trw(const Graph& g, const TrwParams& params, unsigned threads) {
    params.validate();
    const std::uint32_t n = g.node_count();
    const std::uint64_t walkers = static_cast<std::uint64_t>(n) * params.walkers_per_node;
    std::vector<WalkerTrace> traces(walkers);

    auto simulate_range = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t w = begin; w < end; ++w) {
            const std::uint32_t issuer = static_cast<std::uint32_t>(w / params.walkers_per_node);
            const std::uint32_t index = static_cast<std::uint32_t>(w % params.walkers_per_node);
            WalkerTrace& trace = traces[w];
            trace.id = make_walker_id(params.seed, issuer, index);
            trace.issuer = issuer;
            trace.path.reserve(params.ttl + 1);
            trace.path.push_back(issuer);
            Rng rng(derive(params.seed, trace.id.hi, trace.id.lo));
            std::uint32_t cur = issuer;
            for (std::uint32_t ttl = params.ttl; ttl > 0; --ttl) {
                const auto nb = g.neighbors(cur);
                if (nb.empty()) break; // stranded at a degree-0 node
                cur = nb[rng.below(static_cast<std::uint32_t>(nb.size()))];
                trace.path.push_back(cur);
            }
        }
    };

    if (threads <= 1 || walkers < 2 * threads) {
        simulate_range(0, walkers);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (walkers + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t begin = t * chunk;
            if (begin >= walkers) break;
            pool.emplace_back(simulate_range, begin, std::min(walkers, begin + chunk));
        }
        for (auto& th : pool) th.join();
    }

    TrwRun run;
    run.traces = std::move(traces);
    run.sets = sets_from_traces(n, run.traces);
    run.transcripts = transcripts_from_traces(n, params.ttl, run.traces);
    return run;
}

WalkerSets sets_from_traces(std::uint32_t node_count, std::span<const WalkerTrace> traces) {
    std::vector<std::vector<WalkerId>> sets(node_count);
    for (const auto& trace : traces)
        for (std::uint32_t v : trace.path) sets[v].push_back(trace.id);
    for (auto& s : sets) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return WalkerSets(std::move(sets));
}

std::vector<NodeTranscript> transcripts_from_traces(std::uint32_t node_count, std::uint32_t ttl,
                                                    std::span<const WalkerTrace> traces) {
    std::vector<NodeTranscript> transcripts(node_count);
    for (const auto& trace : traces) {
        transcripts[trace.issuer].push_back({trace.id, ttl, kSelfSender});
        for (std::size_t h = 1; h < trace.path.size(); ++h)
            transcripts[trace.path[h]].push_back(
                {trace.id, ttl - static_cast<std::uint32_t>(h), trace.path[h - 1]});
    }
    for (auto& t : transcripts) {
        std::sort(t.begin(), t.end(), [ttl](const ArrivalEvent& a, const ArrivalEvent& b) {
            if (a.walker != b.walker) return a.walker < b.walker;
            return hop_of(ttl, a) < hop_of(ttl, b);
        });
    }
    return transcripts;
}

std::size_t intersection_count(std::span<const WalkerId> a, std::span<const WalkerId> b) {
    std::size_t count = 0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] < b[ib]) {
            ++ia;
        } else if (b[ib] < a[ia]) {
            ++ib;
        } else {
            ++count;
            ++ia;
            ++ib;
        }
    }
    return count;
}

bool intersection_at_least(std::span<const WalkerId> a, std::span<const WalkerId> b,
                           std::size_t threshold) {
    if (threshold == 0) return true;
    std::size_t count = 0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] < b[ib]) {
            ++ia;
        } else if (b[ib] < a[ia]) {
            ++ib;
        } else {
            if (++count >= threshold) return true;
            ++ia;
            ++ib;
        }
    }
    return false;
}

std::size_t intersection_size(const WalkerSets& ws, std::uint32_t i, std::uint32_t j) {
    const auto& a = ws.set_of(i);
    const auto& b = ws.set_of(j);
    if (i == j) return a.size();
    return intersection_count(a, b);
}

LocalityStats locality_stats(std::span<const WalkerTrace> traces, const Graph& g) {
    LocalityStats stats;
    std::vector<std::uint64_t> at_hop, intra_at_hop, inside_before, escaped;
    std::uint64_t events = 0, intra_events = 0;
    for (const auto& trace : traces) {
        const std::uint32_t home = g.community_of(trace.issuer);
        for (std::size_t h = 1; h < trace.path.size(); ++h) {
            if (at_hop.size() < h) {
                at_hop.resize(h, 0);
                intra_at_hop.resize(h, 0);
                inside_before.resize(h, 0);
                escaped.resize(h, 0);
            }
            const bool intra = g.community_of(trace.path[h]) == home;
            ++at_hop[h - 1];
            if (intra) ++intra_at_hop[h - 1];
            if (g.community_of(trace.path[h - 1]) == home) {
                ++inside_before[h - 1];
                if (!intra) ++escaped[h - 1];
            }
            ++events;
            if (intra) ++intra_events;
        }
    }
    stats.intra_fraction.resize(at_hop.size());
    stats.escape_rate.resize(at_hop.size());
    for (std::size_t h = 0; h < at_hop.size(); ++h) {
        stats.intra_fraction[h] =
            at_hop[h] ? static_cast<double>(intra_at_hop[h]) / static_cast<double>(at_hop[h]) : 0.0;
        stats.escape_rate[h] = inside_before[h] ? static_cast<double>(escaped[h]) /
                                                      static_cast<double>(inside_before[h])
                                                : 0.0;
    }
    stats.intra_event_fraction =
        events ? static_cast<double>(intra_events) / static_cast<double>(events) : 1.0;
    return stats;
}

void dump_traces(std::span<const WalkerTrace> traces, std::ostream& out) {
    for (const auto& trace : traces) {
        out << walker_id_hex(trace.id) << ' ' << trace.issuer << ':';
        for (std::uint32_t v : trace.path) out << ' ' << v;
        out << '\n';
    }
}

void dump_walker_sets(const WalkerSets& ws, std::ostream& out) {
    for (std::uint32_t v = 0; v < ws.node_count(); ++v) {
        out << v << ':';
        for (const auto& id : ws.set_of(v)) out << ' ' << walker_id_hex(id);
        out << '\n';
    }
}

std::vector<WalkerTrace> load_traces(std::istream& in) {
    std::vector<WalkerTrace> traces;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id_tok, issuer_tok;
        row >> id_tok >> issuer_tok;
        if (issuer_tok.empty() || issuer_tok.back() != ':')
            throw ParseError("trace: expected '<id> <issuer>:'", line_no);
        WalkerTrace trace;
        try {
            trace.id = walker_id_from_hex(id_tok);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
        try {
            trace.issuer = static_cast<std::uint32_t>(
                std::stoul(issuer_tok.substr(0, issuer_tok.size() - 1)));
        } catch (const std::exception&) {
            throw ParseError("trace: bad issuer '" + issuer_tok + "'", line_no);
        }
        std::uint32_t v = 0;
        while (row >> v) trace.path.push_back(v);
        if (!row.eof()) throw ParseError("trace: trailing garbage", line_no);
        if (trace.path.empty() || trace.path.front() != trace.issuer)
            throw ParseError("trace: path must start at the issuer", line_no);
        traces.push_back(std::move(trace));
    }
    return traces;
}

} // namespace pcd
