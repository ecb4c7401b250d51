#include "pcd/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pcd/errors.hpp"
#include "pcd/rng.hpp"

namespace pcd {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

ordered_json estimate_json(const Estimate& e) {
    return {{"value", e.value}, {"ci95", {e.lo, e.hi}}, {"samples", e.samples}};
}

ordered_json bound_json(const BoundValue& b, const std::string& provenance) {
    return {{"raw", b.raw}, {"clamped", b.clamped}, {"valid", b.valid}, {"provenance", provenance}};
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

void ExperimentConfig::validate() const {
    cbrg.validate();
    trw.validate();
    if (threshold == 0) {
        if (!(target_fpr >= 0.0 && target_fpr <= 1.0 && target_fnr >= 0.0 && target_fnr <= 1.0))
            throw std::invalid_argument("config: calibration targets must lie in [0, 1]");
    }
    if (sampling.pairs < 1) throw std::invalid_argument("config: sampling.pairs must be >= 1");
    if (sampling.trials < 100)
        throw std::invalid_argument("config: sampling.trials must be >= 100");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    for (const auto& s : adversary.strategies)
        if (s != "prior" && s != "intersection" && s != "psiset")
            throw std::invalid_argument("config: unknown adversary strategy '" + s + "'");
    if (is_full_scale() && !allow_full_scale)
        throw std::invalid_argument(
            "config: this parameter set is full-scale (large node or walker count); "
            "pass --full-scale to acknowledge the cost");
}

bool ExperimentConfig::is_full_scale() const {
    const std::uint64_t n = cbrg.node_count();
    const std::uint64_t walkers = n * trw.walkers_per_node;
    return n > 5000 || walkers > 500000;
}

std::string ExperimentConfig::canonical_kv() const {
    std::ostringstream out;
    out << "cbrg.K = " << cbrg.num_communities << "\n";
    out << "cbrg.c = " << cbrg.community_size << "\n";
    out << "cbrg.p = " << format_double(cbrg.intra_prob) << "\n";
    out << "cbrg.q = " << format_double(cbrg.inter_prob) << "\n";
    out << "cbrg.seed = " << cbrg.seed << "\n";
    out << "trw.W = " << trw.walkers_per_node << "\n";
    out << "trw.L = " << trw.ttl << "\n";
    out << "trw.seed = " << trw.seed << "\n";
    out << "detection.variant = " << to_string(variant) << "\n";
    out << "detection.T = " << threshold << "\n";
    out << "detection.target_fpr = " << format_double(target_fpr) << "\n";
    out << "detection.target_fnr = " << format_double(target_fnr) << "\n";
    out << "adversary.enabled = " << (adversary.enabled ? "true" : "false") << "\n";
    out << "adversary.strategies = "
        << (adversary.strategies.empty() ? "auto" : join(adversary.strategies, ',')) << "\n";
    out << "adversary.sniff_seed = " << adversary.sniff_seed << "\n";
    out << "sampling.pairs = " << sampling.pairs << "\n";
    out << "sampling.trials = " << sampling.trials << "\n";
    out << "sampling.seed = " << sampling.seed << "\n";
    return out.str();
}

std::string ExperimentConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_kv())));
    return buf;
}

ExperimentConfig ExperimentConfig::from_kv_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value': '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "cbrg.K") cfg.cbrg.num_communities = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "cbrg.c") cfg.cbrg.community_size = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "cbrg.p") cfg.cbrg.intra_prob = std::stod(value);
            else if (key == "cbrg.q") cfg.cbrg.inter_prob = std::stod(value);
            else if (key == "cbrg.seed") cfg.cbrg.seed = std::stoull(value);
            else if (key == "trw.W") cfg.trw.walkers_per_node = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "trw.L") cfg.trw.ttl = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "trw.seed") cfg.trw.seed = std::stoull(value);
            else if (key == "detection.variant") cfg.variant = psi_variant_from_string(value);
            else if (key == "detection.T") cfg.threshold = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "detection.target_fpr") cfg.target_fpr = std::stod(value);
            else if (key == "detection.target_fnr") cfg.target_fnr = std::stod(value);
            else if (key == "adversary.enabled") {
                if (value != "true" && value != "false")
                    throw std::invalid_argument("expected true/false");
                cfg.adversary.enabled = value == "true";
            } else if (key == "adversary.strategies") {
                cfg.adversary.strategies = value == "auto" ? std::vector<std::string>{} : split(value, ',');
            } else if (key == "adversary.sniff_seed") cfg.adversary.sniff_seed = std::stoull(value);
            else if (key == "sampling.pairs") cfg.sampling.pairs = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "sampling.trials") cfg.sampling.trials = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "sampling.seed") cfg.sampling.seed = std::stoull(value);
            else if (key == "output.dir") cfg.output_dir = value;
            else if (key == "threads") cfg.threads = static_cast<unsigned>(std::stoul(value));
            else throw std::invalid_argument("unknown key '" + key + "'");
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " +
                                        e.what());
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": bad value for '" + key + "': " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_kv_text(buffer.str());
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
    ExperimentConfig cfg; // defaults are the desk preset
    if (name == "desk") return cfg;
    if (name == "paper-4.3") {
        cfg.cbrg = CbrgParams{100, 500, 0.5, 0.0005, 1};
        cfg.trw = TrwParams{100, 3, 2};
        cfg.threshold = 61;
        return cfg;
    }
    throw std::invalid_argument("unknown preset '" + name + "' (available: desk, paper-4.3)");
}

std::vector<std::string> ExperimentConfig::preset_names() { return {"desk", "paper-4.3"}; }

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();

    ordered_json report;
    report["config"] = ordered_json::object();
    {
        std::istringstream kv(config.canonical_kv());
        std::string line;
        while (std::getline(kv, line)) {
            const auto eq = line.find('=');
            report["config"][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
    }
    report["config_hash"] = config.hash();

    const Graph g = generate(config.cbrg);
    report["graph"] = {{"nodes", g.node_count()},
                       {"edges", g.edge_count()},
                       {"degenerate_model", config.cbrg.degenerate()}};

    const TrwRun run = run_trw(g, config.trw, config.threads);
    const LocalityStats locality = locality_stats(run.traces, g);
    report["trw"] = {{"walkers", run.traces.size()},
                     {"set_entries", run.sets.total_entries()},
                     {"intra_event_fraction", locality.intra_event_fraction},
                     {"intra_fraction_by_hop", locality.intra_fraction},
                     {"escape_rate_by_hop", locality.escape_rate}};

    std::uint32_t threshold = config.threshold;
    if (threshold == 0) {
        const CalibrationResult cal =
            calibrate_threshold(g, run.sets, config.sampling.pairs, config.target_fpr,
                                config.target_fnr, derive(config.sampling.seed, 0xCA));
        report["calibration"] = {{"feasible", cal.feasible},
                                 {"threshold", cal.threshold},
                                 {"predicted_fpr", cal.predicted_fpr},
                                 {"predicted_fnr", cal.predicted_fnr},
                                 {"mu_hat", cal.mu_hat},
                                 {"note", cal.note}};
        if (!cal.feasible)
            throw std::runtime_error("calibration infeasible: " + cal.note +
                                     " (targets fpr<=" + format_double(config.target_fpr) +
                                     ", fnr<=" + format_double(config.target_fnr) + ")");
        threshold = cal.threshold;
    }
    report["threshold"] = threshold;

    const DecisionConfig decision{threshold, config.variant};
    const ErrorRates rates = empirical_error_rates(run.sets, decision, g, config.sampling.pairs,
                                                   derive(config.sampling.seed, 0xE7));
    report["empirical"] = ordered_json::object();
    if (rates.fpr) report["empirical"]["fpr"] = estimate_json(*rates.fpr);
    if (rates.fnr) report["empirical"]["fnr"] = estimate_json(*rates.fnr);

    BoundParams bp;
    bp.num_communities = config.cbrg.num_communities;
    bp.community_size = config.cbrg.community_size;
    bp.intra_prob = config.cbrg.intra_prob;
    bp.inter_prob = config.cbrg.inter_prob;
    bp.walkers_per_node = config.trw.walkers_per_node;
    bp.ttl = config.trw.ttl;
    bp.threshold = threshold;
    report["bounds"] = ordered_json::object();
    if (config.cbrg.num_communities >= 2 && config.trw.ttl >= 1) {
        const Estimate phi = estimate_phi(g, run.sets, config.trw, config.sampling.trials,
                                          derive(config.sampling.seed, 0xF1));
        bp.phi = phi.value;
        report["bounds"]["phi"] = estimate_json(phi);
        report["bounds"]["fpr"] = bound_json(fpr_bound(bp), "estimated");
    }
    if (config.cbrg.community_size >= 2) {
        const Estimate p = estimate_visit_prob(g, config.trw, config.sampling.trials,
                                               derive(config.sampling.seed, 0xF2));
        bp.visit_prob = p.value;
        report["bounds"]["visit_prob"] = estimate_json(p);
        if (bp.mu() > 0.0) report["bounds"]["fnr"] = bound_json(fnr_bound(bp), "estimated");
    }
    if (config.cbrg.num_communities >= 2)
        report["bounds"]["adv"] = bound_json(adv_bound(bp), "exact");

    if (config.adversary.enabled) {
        Rng sniff(derive(config.adversary.sniff_seed, 0xA0));
        const std::uint32_t a = sniff.below(g.node_count());
        const AdversaryView view = build_view(g, run, decision, config.trw, a);
        ordered_json adv_section;
        adv_section["sniffed"] = a;
        adv_section["variant"] = to_string(config.variant);
        adv_section["foreign_leakage_bits"] = foreign_leakage_bits(view);
        adv_section["challenge_nodes"] = view.challenge_nodes().size();
        adv_section["strategies"] = ordered_json::array();
        if (view.challenge_nodes().size() < 2) {
            adv_section["note"] = "challenge relation empty; adversary evaluation skipped";
        } else {
            std::vector<std::string> strategies = config.adversary.strategies;
            if (strategies.empty()) strategies = applicable_strategies(config.variant);
            for (std::size_t idx = 0; idx < strategies.size(); ++idx) {
                const auto& name = strategies[idx];
                ordered_json row;
                row["strategy"] = name;
                const auto applicable = applicable_strategies(config.variant);
                if (std::find(applicable.begin(), applicable.end(), name) == applicable.end()) {
                    row["skipped"] = "insufficient leakage under " +
                                     std::string(to_string(config.variant));
                } else {
                    const Guess guess = run_strategy(name, view);
                    const StrategyEval eval =
                        evaluate(guess, g, view, config.sampling.pairs,
                                 derive(config.adversary.sniff_seed, 0xB0 + idx));
                    row["succ_m"] = estimate_json(eval.succ_m);
                    row["succ_c"] = estimate_json(eval.succ_c);
                    row["adv_m"] = {{"value", eval.adv_m.value}, {"ci95", {eval.adv_m.lo, eval.adv_m.hi}}};
                    row["adv_c"] = {{"value", eval.adv_c.value}, {"ci95", {eval.adv_c.lo, eval.adv_c.hi}}};
                    row["bound_adv"] = {{"raw", eval.bound_raw}, {"clamped", eval.bound_clamped}};
                    row["gamma_hat"] = {{"m", eval.gamma_hat_m}, {"c", eval.gamma_hat_c}};
                }
                adv_section["strategies"].push_back(std::move(row));
            }
        }
        report["adversary"] = std::move(adv_section);
    }

    ExperimentReport out;
    out.config = config;
    out.json = std::move(report);
    return out;
}

std::string ExperimentReport::to_json_text() const { return json.dump(2) + "\n"; }

namespace {

std::string fmt_estimate(const ordered_json& e) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.6g  [%.6g, %.6g]", e.at("value").get<double>(),
                  e.at("ci95")[0].get<double>(), e.at("ci95")[1].get<double>());
    return buf;
}

std::string fmt_bound(const ordered_json& b) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "raw %.6g  clamped %.6g%s (%s)", b.at("raw").get<double>(),
                  b.at("clamped").get<double>(), b.at("valid").get<bool>() ? "" : "  [vacuous]",
                  b.at("provenance").get<std::string>().c_str());
    return buf;
}

} // namespace

std::string render_report_table(const ordered_json& report) {
    std::ostringstream out;
    out << "experiment " << report.at("config_hash").get<std::string>() << "\n";
    const auto& cfg = report.at("config");
    out << "  graph      CBRG(K=" << cfg.at("cbrg.K").get<std::string>() << ", c="
        << cfg.at("cbrg.c").get<std::string>() << ", p=" << cfg.at("cbrg.p").get<std::string>()
        << ", q=" << cfg.at("cbrg.q").get<std::string>() << ")  nodes "
        << report.at("graph").at("nodes") << "  edges " << report.at("graph").at("edges") << "\n";
    out << "  protocol   W=" << cfg.at("trw.W").get<std::string>() << " L="
        << cfg.at("trw.L").get<std::string>() << " T=" << report.at("threshold").dump()
        << " variant=" << cfg.at("detection.variant").get<std::string>() << "\n";
    if (report.contains("calibration")) {
        const auto& cal = report.at("calibration");
        out << "  calibration T=" << cal.at("threshold").dump() << " predicted fpr "
            << cal.at("predicted_fpr").get<double>() << " fnr " << cal.at("predicted_fnr").get<double>()
            << (cal.at("feasible").get<bool>() ? "" : "  INFEASIBLE") << "\n";
    }
    if (report.contains("empirical")) {
        const auto& emp = report.at("empirical");
        if (emp.contains("fpr")) out << "  fpr        " << fmt_estimate(emp.at("fpr")) << "\n";
        if (emp.contains("fnr")) out << "  fnr        " << fmt_estimate(emp.at("fnr")) << "\n";
    }
    if (report.contains("bounds")) {
        const auto& bounds = report.at("bounds");
        if (bounds.contains("fpr")) out << "  fpr bound  " << fmt_bound(bounds.at("fpr")) << "\n";
        if (bounds.contains("fnr")) out << "  fnr bound  " << fmt_bound(bounds.at("fnr")) << "\n";
        if (bounds.contains("adv")) out << "  adv bound  " << fmt_bound(bounds.at("adv")) << "\n";
    }
    if (report.contains("adversary")) {
        const auto& adv = report.at("adversary");
        out << "  adversary  node " << adv.at("sniffed") << "  foreign bits "
            << adv.at("foreign_leakage_bits") << "\n";
        for (const auto& row : adv.at("strategies")) {
            out << "    " << row.at("strategy").get<std::string>() << ": ";
            if (row.contains("skipped")) {
                out << "skipped (" << row.at("skipped").get<std::string>() << ")\n";
                continue;
            }
            char buf[256];
            std::snprintf(buf, sizeof(buf),
                          "succ_m %.4f succ_c %.4f adv_m %+.4f adv_c %+.4f (bound %.4g, "
                          "gamma_hat %.3g/%.3g)",
                          row.at("succ_m").at("value").get<double>(),
                          row.at("succ_c").at("value").get<double>(),
                          row.at("adv_m").at("value").get<double>(),
                          row.at("adv_c").at("value").get<double>(),
                          row.at("bound_adv").at("clamped").get<double>(),
                          row.at("gamma_hat").at("m").get<double>(),
                          row.at("gamma_hat").at("c").get<double>());
            out << buf << "\n";
        }
    }
    return out.str();
}

std::string ExperimentReport::to_table() const { return render_report_table(json); }

void save_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const Graph& g, const TrwRun& run) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "config.kv");
        if (!out) throw std::runtime_error("cannot write " + (dir / "config.kv").string());
        out << config.canonical_kv();
    }
    save_graph(g, dir / "graph.cbrg");
    {
        std::ofstream out(dir / "traces.txt");
        if (!out) throw std::runtime_error("cannot write " + (dir / "traces.txt").string());
        dump_traces(run.traces, out);
    }
    {
        std::ofstream out(dir / "walker_sets.txt");
        if (!out) throw std::runtime_error("cannot write " + (dir / "walker_sets.txt").string());
        dump_walker_sets(run.sets, out);
    }
}

LoadedArtifacts load_artifacts(const std::filesystem::path& dir) {
    ExperimentConfig config = ExperimentConfig::from_file(dir / "config.kv");
    Graph graph = load_graph(dir / "graph.cbrg");
    std::ifstream in(dir / "traces.txt");
    if (!in) throw std::runtime_error("cannot open " + (dir / "traces.txt").string());
    std::vector<WalkerTrace> traces = load_traces(in);
    TrwRun run;
    run.sets = sets_from_traces(graph.node_count(), traces);
    run.transcripts = transcripts_from_traces(graph.node_count(), config.trw.ttl, traces);
    run.traces = std::move(traces);
    return {std::move(config), std::move(graph), std::move(run)};
}

nlohmann::ordered_json adversary_record(PsiVariant variant, std::uint32_t sniffed,
                                        const StrategyEval& eval) {
    ordered_json rec;
    rec["variant"] = to_string(variant);
    rec["a"] = sniffed;
    rec["strategy"] = eval.strategy;
    rec["succ_M"] = eval.succ_m.value;
    rec["succ_C"] = eval.succ_c.value;
    rec["adv_M"] = eval.adv_m.value;
    rec["adv_C"] = eval.adv_c.value;
    rec["ci"] = {{"succ_M", {eval.succ_m.lo, eval.succ_m.hi}},
                 {"succ_C", {eval.succ_c.lo, eval.succ_c.hi}},
                 {"adv_M", {eval.adv_m.lo, eval.adv_m.hi}},
                 {"adv_C", {eval.adv_c.lo, eval.adv_c.hi}}};
    rec["bound_adv"] = eval.bound_clamped;
    rec["gamma_hat"] = {{"M", eval.gamma_hat_m}, {"C", eval.gamma_hat_c}};
    return rec;
}

} // namespace pcd
