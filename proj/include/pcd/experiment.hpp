#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcd/adversary.hpp"
#include "pcd/bounds.hpp"
#include "pcd/cbrg.hpp"
#include "pcd/detector.hpp"
#include "pcd/trw.hpp"

namespace pcd {

struct AdversaryConfig {
    bool enabled = true;
    std::vector<std::string> strategies; // empty = every applicable strategy
    std::uint64_t sniff_seed = 3;
};

struct SamplingConfig {
    std::uint32_t pairs = 2000;   // per class / per evaluation
    std::uint32_t trials = 20000; // estimator trials
    std::uint64_t seed = 4;
};

// One experiment, fully described: generate -> walk -> calibrate/detect ->
// attack -> report. Serializes to a flat key-value config; the canonical
// serialization is hashed into every report.
struct ExperimentConfig {
    CbrgParams cbrg{10, 50, 0.5, 0.0005, 1};
    TrwParams trw{100, 3, 2};
    PsiVariant variant = PsiVariant::psi_threshold;
    std::uint32_t threshold = 0; // 0 = calibrate from targets below
    double target_fpr = 0.05;
    double target_fnr = 0.01;
    AdversaryConfig adversary;
    SamplingConfig sampling;
    std::string output_dir; // empty = PCDSIM_OUT env var or "."
    unsigned threads = 1;
    bool allow_full_scale = false;

    void validate() const;
    bool is_full_scale() const;

    // Flat `key = value` form, keys in canonical order.
    std::string canonical_kv() const;
    std::string hash() const; // FNV-1a 64 of canonical_kv, hex

    static ExperimentConfig from_kv_text(const std::string& text); // throws ParseError
    static ExperimentConfig from_file(const std::filesystem::path& path);
    static ExperimentConfig preset(const std::string& name); // "desk" | "paper-4.3"
    static std::vector<std::string> preset_names();
};

struct ExperimentReport {
    ExperimentConfig config;
    nlohmann::ordered_json json;

    std::string to_json_text() const; // canonical, byte-stable for fixed config
    std::string to_table() const;     // human-readable summary
};

// Runs the full pipeline. Deterministic: identical configs (seeds included)
// produce byte-identical reports at any thread count.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Re-renders a report JSON into the human-readable table.
std::string render_report_table(const nlohmann::ordered_json& report);

// Artifact persistence for later re-attack: config echo, graph file and
// ground-truth trace dump in one directory.
void save_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config,
                    const Graph& g, const TrwRun& run);

struct LoadedArtifacts {
    ExperimentConfig config;
    Graph graph;
    TrwRun run;
};

LoadedArtifacts load_artifacts(const std::filesystem::path& dir);

// Adversary report record for one strategy (External interface of the
// `adversary` subcommand).
nlohmann::ordered_json adversary_record(PsiVariant variant, std::uint32_t sniffed,
                                        const StrategyEval& eval);

} // namespace pcd
