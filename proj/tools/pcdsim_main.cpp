#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pcd/adversary.hpp"
#include "pcd/bounds.hpp"
#include "pcd/cbrg.hpp"
#include "pcd/errors.hpp"
#include "pcd/experiment.hpp"
#include "pcd/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitInvariant = 3;

std::filesystem::path default_output_dir(const std::string& configured) {
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("PCDSIM_OUT"); env && *env) return env;
    return ".";
}

struct ConfigCliOptions {
    std::string preset;
    std::string config_file;
    std::vector<std::string> overrides; // key=value
};

pcd::ExperimentConfig resolve_config(const ConfigCliOptions& opt, bool allow_full_scale,
                                     unsigned threads) {
    pcd::ExperimentConfig cfg;
    if (!opt.preset.empty()) cfg = pcd::ExperimentConfig::preset(opt.preset);
    if (!opt.config_file.empty()) cfg = pcd::ExperimentConfig::from_file(opt.config_file);
    if (!opt.overrides.empty()) {
        std::string text = cfg.canonical_kv();
        for (const auto& kv : opt.overrides) text += kv + "\n";
        cfg = pcd::ExperimentConfig::from_kv_text(text);
    }
    cfg.allow_full_scale = allow_full_scale;
    if (threads > 0) cfg.threads = threads;
    return cfg;
}

void warn_if_full_scale(const pcd::ExperimentConfig& cfg) {
    if (cfg.is_full_scale())
        std::cerr << "warning: full-scale parameter set (" << cfg.cbrg.node_count() << " nodes, "
                  << static_cast<std::uint64_t>(cfg.cbrg.node_count()) * cfg.trw.walkers_per_node
                  << " walkers); this will take a while and real memory\n";
}

int cmd_generate(const ConfigCliOptions& opt, bool full_scale, const std::string& out_path) {
    pcd::ExperimentConfig cfg = resolve_config(opt, full_scale, 0);
    cfg.validate();
    warn_if_full_scale(cfg);
    if (cfg.cbrg.degenerate())
        std::cerr << "warning: q > p; the community structure is inverted\n";
    const pcd::Graph g = pcd::generate(cfg.cbrg);
    std::filesystem::path path = out_path.empty()
                                     ? default_output_dir(cfg.output_dir) / "graph.cbrg"
                                     : std::filesystem::path(out_path);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    pcd::save_graph(g, path);
    std::cout << "wrote " << path.string() << " (" << g.node_count() << " nodes, "
              << g.edge_count() << " edges)\n";
    return kExitOk;
}

int cmd_run(const ConfigCliOptions& opt, bool full_scale, unsigned threads,
            const std::string& out_dir_flag, const std::string& artifacts_dir) {
    pcd::ExperimentConfig cfg = resolve_config(opt, full_scale, threads);
    cfg.validate();
    warn_if_full_scale(cfg);
    const pcd::ExperimentReport report = pcd::run_experiment(cfg);

    const std::filesystem::path out_dir =
        default_output_dir(out_dir_flag.empty() ? cfg.output_dir : out_dir_flag);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path json_path = out_dir / "report.json";
    {
        std::ofstream out(json_path);
        if (!out) throw std::runtime_error("cannot write " + json_path.string());
        out << report.to_json_text();
    }
    std::cout << report.to_table();
    std::cout << "report: " << json_path.string() << "\n";

    if (!artifacts_dir.empty()) {
        const pcd::Graph g = pcd::generate(cfg.cbrg);
        const pcd::TrwRun run = pcd::run_trw(g, cfg.trw, cfg.threads);
        pcd::save_artifacts(artifacts_dir, cfg, g, run);
        std::cout << "artifacts: " << artifacts_dir << "\n";
    }
    return kExitOk;
}

int cmd_bounds(std::uint32_t k, std::uint32_t c, double p, double q, std::uint32_t w,
               std::uint32_t l, std::uint32_t t, std::optional<double> phi,
               std::optional<double> visit_prob, std::optional<double> invert_phi_target,
               std::optional<double> invert_p_target, bool estimate_p, std::uint32_t trials,
               std::uint64_t seed) {
    pcd::BoundParams bp;
    bp.num_communities = k;
    bp.community_size = c;
    bp.intra_prob = p;
    bp.inter_prob = q;
    bp.walkers_per_node = w;
    bp.ttl = l;
    bp.threshold = t;

    std::string phi_provenance = "supplied";
    std::string p_provenance = "supplied";
    if (invert_phi_target) {
        bp.phi = pcd::invert_phi(bp, *invert_phi_target);
        phi_provenance = "inverted";
    } else if (phi) {
        bp.phi = *phi;
    }
    if (invert_p_target) {
        bp.visit_prob = pcd::invert_visit_prob(bp, *invert_p_target);
        p_provenance = "inverted";
    } else if (visit_prob) {
        bp.visit_prob = *visit_prob;
    }
    if (estimate_p) {
        pcd::CbrgParams cbrg{k, c, p, q, seed};
        const pcd::Graph g = pcd::generate(cbrg);
        pcd::TrwParams trw{w, l, pcd::derive(seed, 1)};
        const pcd::Estimate est = pcd::estimate_visit_prob(g, trw, trials, pcd::derive(seed, 2));
        bp.visit_prob = est.value;
        p_provenance = "estimated";
        std::printf("P estimate       %.6g  ci95 [%.6g, %.6g]  (%u trials)\n", est.value, est.lo,
                    est.hi, trials);
    }

    std::printf("parameters       K=%u c=%u W=%u L=%u T=%u\n", k, c, w, l, t);
    std::printf("phi              %-12.8g (%s)\n", bp.phi, phi_provenance.c_str());
    std::printf("P                %-12.8g (%s)  mu=%.6g\n", bp.visit_prob, p_provenance.c_str(),
                bp.mu());
    auto print_bound = [](const char* name, const pcd::BoundValue& b) {
        std::printf("%-16s raw %-12.8g clamped %-10.8g %s\n", name, b.raw, b.clamped,
                    b.valid ? "" : "[vacuous]");
    };
    if (k >= 2 && bp.phi > 0.0) print_bound("fpr bound", pcd::fpr_bound(bp));
    if (bp.mu() > 0.0) print_bound("fnr bound", pcd::fnr_bound(bp));
    print_bound("adv bound", pcd::adv_bound(bp));
    return kExitOk;
}

int cmd_adversary(const std::string& artifacts_dir, const std::string& variant_name,
                  const std::string& strategy, std::optional<std::uint32_t> node,
                  std::uint32_t pairs, std::uint64_t seed, const std::string& out_path) {
    pcd::LoadedArtifacts artifacts = pcd::load_artifacts(artifacts_dir);
    pcd::ExperimentConfig& cfg = artifacts.config;
    const pcd::PsiVariant variant =
        variant_name.empty() ? cfg.variant : pcd::psi_variant_from_string(variant_name);
    if (cfg.threshold == 0)
        throw std::invalid_argument(
            "artifacts were saved without a fixed threshold; re-run with detection.T set");

    std::uint32_t a;
    if (node) {
        a = *node;
    } else {
        pcd::Rng sniff(pcd::derive(seed, 0xA0));
        a = sniff.below(artifacts.graph.node_count());
    }
    const pcd::DecisionConfig decision{cfg.threshold, variant};
    const pcd::AdversaryView view =
        pcd::build_view(artifacts.graph, artifacts.run, decision, cfg.trw, a);

    std::vector<std::string> strategies;
    if (strategy == "auto" || strategy.empty())
        strategies = pcd::applicable_strategies(variant);
    else
        strategies = {strategy};

    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (std::size_t idx = 0; idx < strategies.size(); ++idx) {
        const pcd::Guess guess = pcd::run_strategy(strategies[idx], view);
        const pcd::StrategyEval eval = pcd::evaluate(guess, artifacts.graph, view, pairs,
                                                     pcd::derive(seed, 0xB0 + idx));
        records.push_back(pcd::adversary_record(variant, a, eval));
    }
    const std::string text = records.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        out << text;
        std::cout << "adversary report: " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_report(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("cannot open " + json_path);
    nlohmann::ordered_json report;
    try {
        in >> report;
    } catch (const nlohmann::json::exception& e) {
        throw pcd::ParseError(std::string("report: ") + e.what());
    }
    std::cout << pcd::render_report_table(report);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pcdsim: privacy-preserving decentralized community detection simulator"};
    app.require_subcommand(1);

    ConfigCliOptions opt;
    bool full_scale = false;
    unsigned threads = 0;
    app.add_flag("--full-scale", full_scale,
                 "acknowledge a full-scale parameter set (large runtime/memory)");

    auto* gen = app.add_subcommand("generate", "generate a graph file from the model");
    std::string gen_out;
    gen->add_option("--preset", opt.preset, "parameter preset (desk, paper-4.3)");
    gen->add_option("--config", opt.config_file, "flat key-value config file");
    gen->add_option("--set", opt.overrides, "override, e.g. --set cbrg.K=10")->take_all();
    gen->add_option("-o,--out", gen_out, "output path (default <outdir>/graph.cbrg)");

    auto* run = app.add_subcommand("run", "run the full pipeline and write a report");
    std::string run_out, run_artifacts;
    run->add_option("--preset", opt.preset, "parameter preset (desk, paper-4.3)");
    run->add_option("--config", opt.config_file, "flat key-value config file");
    run->add_option("--set", opt.overrides, "override, e.g. --set trw.W=50")->take_all();
    run->add_option("--threads", threads, "worker threads for the walk stage");
    run->add_option("-o,--outdir", run_out, "output directory (default $PCDSIM_OUT or .)");
    run->add_option("--save-artifacts", run_artifacts,
                    "also persist graph/traces for later re-attack");

    auto* bounds = app.add_subcommand("bounds", "evaluate the closed-form bounds");
    std::uint32_t b_k = 100, b_c = 500, b_w = 100, b_l = 3, b_t = 61, b_trials = 20000;
    double b_p = 0.5, b_q = 0.0005;
    std::uint64_t b_seed = 1;
    std::optional<double> b_phi, b_visit, b_invert_phi, b_invert_p;
    bool b_estimate_p = false;
    bounds->add_option("-K", b_k, "number of communities")->capture_default_str();
    bounds->add_option("-c", b_c, "community size")->capture_default_str();
    bounds->add_option("-p", b_p, "intra-community edge probability")->capture_default_str();
    bounds->add_option("-q", b_q, "inter-community edge probability")->capture_default_str();
    bounds->add_option("-W", b_w, "walkers per node")->capture_default_str();
    bounds->add_option("-L", b_l, "walker TTL")->capture_default_str();
    bounds->add_option("-T", b_t, "intersection threshold")->capture_default_str();
    bounds->add_option("--phi", b_phi, "FPR-bound coefficient");
    bounds->add_option("--visit-prob", b_visit, "per-walker same-community visit probability P");
    bounds->add_option("--invert-phi", b_invert_phi, "solve phi from this FPR target");
    bounds->add_option("--invert-P", b_invert_p, "solve P from this FNR target");
    bounds->add_flag("--estimate-P", b_estimate_p,
                     "estimate P by Monte-Carlo on a CBRG(K,c,p,q) pilot");
    bounds->add_option("--trials", b_trials, "estimator trials")->capture_default_str();
    bounds->add_option("--seed", b_seed, "estimator seed")->capture_default_str();

    auto* adversary = app.add_subcommand("adversary", "re-attack persisted run artifacts");
    std::string a_dir, a_variant, a_strategy = "auto", a_out;
    std::optional<std::uint32_t> a_node;
    std::uint32_t a_pairs = 2000;
    std::uint64_t a_seed = 3;
    adversary->add_option("--artifacts", a_dir, "artifact directory from run --save-artifacts")
        ->required();
    adversary->add_option("--variant", a_variant, "override the PSI variant to attack");
    adversary->add_option("--strategy", a_strategy, "prior|intersection|psiset|auto");
    adversary->add_option("--node", a_node, "sniffed node (default: seeded uniform draw)");
    adversary->add_option("--pairs", a_pairs, "evaluation sample size")->capture_default_str();
    adversary->add_option("--seed", a_seed, "evaluation seed")->capture_default_str();
    adversary->add_option("-o,--out", a_out, "write the report JSON here instead of stdout");

    auto* report = app.add_subcommand("report", "re-render a report JSON as text");
    std::string r_json;
    report->add_option("json", r_json, "report.json path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_generate(opt, full_scale, gen_out);
        if (run->parsed()) return cmd_run(opt, full_scale, threads, run_out, run_artifacts);
        if (bounds->parsed())
            return cmd_bounds(b_k, b_c, b_p, b_q, b_w, b_l, b_t, b_phi, b_visit, b_invert_phi,
                              b_invert_p, b_estimate_p, b_trials, b_seed);
        if (adversary->parsed())
            return cmd_adversary(a_dir, a_variant, a_strategy, a_node, a_pairs, a_seed, a_out);
        if (report->parsed()) return cmd_report(r_json);
    } catch (const pcd::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}
