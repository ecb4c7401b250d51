#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "pcd/adversary.hpp"
#include "pcd/bounds.hpp"
#include "pcd/cbrg.hpp"
#include "pcd/detector.hpp"
#include "pcd/experiment.hpp"
#include "pcd/metrics.hpp"
#include "pcd/psi.hpp"
#include "pcd/trw.hpp"

namespace py = pybind11;

namespace {

py::dict estimate_dict(const pcd::Estimate& e) {
    py::dict d;
    d["value"] = e.value;
    d["ci95"] = py::make_tuple(e.lo, e.hi);
    d["samples"] = e.samples;
    return d;
}

py::dict bound_dict(const pcd::BoundValue& b) {
    py::dict d;
    d["raw"] = b.raw;
    d["clamped"] = b.clamped;
    d["valid"] = b.valid;
    return d;
}

pcd::BoundParams bound_params(std::uint32_t k, std::uint32_t c, std::uint32_t w, std::uint32_t l,
                              std::uint32_t t, double phi, double visit_prob) {
    pcd::BoundParams bp;
    bp.num_communities = k;
    bp.community_size = c;
    bp.walkers_per_node = w;
    bp.ttl = l;
    bp.threshold = t;
    bp.phi = phi;
    bp.visit_prob = visit_prob;
    return bp;
}

} // namespace

PYBIND11_MODULE(_pcdsim, m) {
    m.doc() = "Privacy-preserving decentralized community detection simulator";

    py::class_<pcd::CbrgParams>(m, "CbrgParams")
        .def(py::init([](std::uint32_t k, std::uint32_t c, double p, double q,
                         std::uint64_t seed) {
                 return pcd::CbrgParams{k, c, p, q, seed};
             }),
             py::arg("K"), py::arg("c"), py::arg("p"), py::arg("q"), py::arg("seed") = 0)
        .def_readwrite("K", &pcd::CbrgParams::num_communities)
        .def_readwrite("c", &pcd::CbrgParams::community_size)
        .def_readwrite("p", &pcd::CbrgParams::intra_prob)
        .def_readwrite("q", &pcd::CbrgParams::inter_prob)
        .def_readwrite("seed", &pcd::CbrgParams::seed)
        .def_property_readonly("n", &pcd::CbrgParams::node_count)
        .def_property_readonly("beta1", &pcd::CbrgParams::beta1);

    py::class_<pcd::Graph>(m, "Graph")
        .def_property_readonly("node_count", &pcd::Graph::node_count)
        .def_property_readonly("edge_count", &pcd::Graph::edge_count)
        .def("neighbors",
             [](const pcd::Graph& g, std::uint32_t v) {
                 auto nb = g.neighbors(v);
                 return std::vector<std::uint32_t>(nb.begin(), nb.end());
             })
        .def("degree", &pcd::Graph::degree)
        .def("community_of", &pcd::Graph::community_of)
        .def("same_community", &pcd::Graph::same_community)
        .def("has_edge", &pcd::Graph::has_edge)
        .def("save", [](const pcd::Graph& g, const std::string& path) { pcd::save_graph(g, path); });

    m.def("generate", &pcd::generate, py::arg("params"));
    m.def("load_graph", [](const std::string& path) { return pcd::load_graph(path); });

    py::class_<pcd::TrwParams>(m, "TrwParams")
        .def(py::init([](std::uint32_t w, std::uint32_t l, std::uint64_t seed) {
                 return pcd::TrwParams{w, l, seed};
             }),
             py::arg("W"), py::arg("L"), py::arg("seed") = 0)
        .def_readwrite("W", &pcd::TrwParams::walkers_per_node)
        .def_readwrite("L", &pcd::TrwParams::ttl)
        .def_readwrite("seed", &pcd::TrwParams::seed);

    py::class_<pcd::TrwRun>(m, "TrwRun")
        .def_property_readonly("walker_count",
                               [](const pcd::TrwRun& r) { return r.traces.size(); })
        .def("set_size",
             [](const pcd::TrwRun& r, std::uint32_t v) { return r.sets.set_of(v).size(); })
        .def("intersection_size",
             [](const pcd::TrwRun& r, std::uint32_t i, std::uint32_t j) {
                 return pcd::intersection_size(r.sets, i, j);
             })
        .def("path", [](const pcd::TrwRun& r, std::uint32_t issuer, std::uint32_t index,
                        std::uint32_t walkers_per_node) {
            return r.traces.at(static_cast<std::size_t>(issuer) * walkers_per_node + index).path;
        });

    m.def("run_trw", &pcd::run_trw, py::arg("graph"), py::arg("params"), py::arg("threads") = 1);
    m.def("locality", [](const pcd::TrwRun& run, const pcd::Graph& g) {
        const pcd::LocalityStats stats = pcd::locality_stats(run.traces, g);
        py::dict d;
        d["intra_fraction_by_hop"] = stats.intra_fraction;
        d["escape_rate_by_hop"] = stats.escape_rate;
        d["intra_event_fraction"] = stats.intra_event_fraction;
        return d;
    });

    py::enum_<pcd::PsiVariant>(m, "PsiVariant")
        .value("PLAIN_EXCHANGE", pcd::PsiVariant::plain_exchange)
        .value("HASHED_EXCHANGE", pcd::PsiVariant::hashed_exchange)
        .value("PSI_SET", pcd::PsiVariant::psi_set)
        .value("PSI_CARDINALITY", pcd::PsiVariant::psi_cardinality)
        .value("PSI_THRESHOLD", pcd::PsiVariant::psi_threshold);

    m.def(
        "run_psi",
        [](pcd::PsiVariant variant, const pcd::TrwRun& run, std::uint32_t i, std::uint32_t j,
           std::uint32_t threshold) {
            const pcd::PsiOutcome outcome =
                pcd::run_psi(variant, run.sets.set_of(i), run.sets.set_of(j), threshold);
            const pcd::LeakageAudit audit = pcd::leakage_audit(outcome);
            py::dict d;
            d["decision"] = outcome.decision;
            d["leakage_bits"] = audit.bits;
            d["leakage"] = audit.summary;
            return d;
        },
        py::arg("variant"), py::arg("run"), py::arg("i"), py::arg("j"), py::arg("threshold"));

    m.def(
        "decide_pair",
        [](const pcd::TrwRun& run, std::uint32_t i, std::uint32_t j, std::uint32_t threshold,
           pcd::PsiVariant variant) {
            return pcd::decide_pair(run.sets, pcd::DecisionConfig{threshold, variant}, i, j);
        },
        py::arg("run"), py::arg("i"), py::arg("j"), py::arg("threshold"),
        py::arg("variant") = pcd::PsiVariant::psi_threshold);

    m.def(
        "build_row",
        [](const pcd::TrwRun& run, std::uint32_t i, std::uint32_t threshold,
           pcd::PsiVariant variant) {
            return pcd::build_row(run.sets, pcd::DecisionConfig{threshold, variant}, i);
        },
        py::arg("run"), py::arg("i"), py::arg("threshold"),
        py::arg("variant") = pcd::PsiVariant::psi_threshold);

    m.def(
        "empirical_error_rates",
        [](const pcd::TrwRun& run, const pcd::Graph& g, std::uint32_t threshold, std::uint32_t m,
           std::uint64_t seed, pcd::PsiVariant variant) {
            const pcd::ErrorRates rates = pcd::empirical_error_rates(
                run.sets, pcd::DecisionConfig{threshold, variant}, g, m, seed);
            py::dict d;
            if (rates.fpr) d["fpr"] = estimate_dict(*rates.fpr);
            if (rates.fnr) d["fnr"] = estimate_dict(*rates.fnr);
            return d;
        },
        py::arg("run"), py::arg("graph"), py::arg("threshold"), py::arg("m"), py::arg("seed"),
        py::arg("variant") = pcd::PsiVariant::psi_threshold);

    m.def(
        "fpr_bound",
        [](std::uint32_t k, std::uint32_t c, std::uint32_t w, std::uint32_t l, std::uint32_t t,
           double phi) { return bound_dict(pcd::fpr_bound(bound_params(k, c, w, l, t, phi, 0))); },
        py::arg("K"), py::arg("c"), py::arg("W"), py::arg("L"), py::arg("T"), py::arg("phi"));
    m.def(
        "fnr_bound",
        [](std::uint32_t k, std::uint32_t c, std::uint32_t w, std::uint32_t l, std::uint32_t t,
           double visit_prob) {
            return bound_dict(pcd::fnr_bound(bound_params(k, c, w, l, t, 0, visit_prob)));
        },
        py::arg("K"), py::arg("c"), py::arg("W"), py::arg("L"), py::arg("T"),
        py::arg("visit_prob"));
    m.def(
        "adv_bound",
        [](std::uint32_t k, std::uint32_t c, std::uint32_t w, std::uint32_t l) {
            return bound_dict(pcd::adv_bound(bound_params(k, c, w, l, 1, 0, 0)));
        },
        py::arg("K"), py::arg("c"), py::arg("W"), py::arg("L"));
    m.def(
        "invert_phi",
        [](std::uint32_t k, std::uint32_t c, std::uint32_t w, std::uint32_t l, std::uint32_t t,
           double target) { return pcd::invert_phi(bound_params(k, c, w, l, t, 0, 0), target); },
        py::arg("K"), py::arg("c"), py::arg("W"), py::arg("L"), py::arg("T"), py::arg("target"));
    m.def(
        "invert_visit_prob",
        [](std::uint32_t k, std::uint32_t c, std::uint32_t w, std::uint32_t l, std::uint32_t t,
           double target) {
            return pcd::invert_visit_prob(bound_params(k, c, w, l, t, 0, 0), target);
        },
        py::arg("K"), py::arg("c"), py::arg("W"), py::arg("L"), py::arg("T"), py::arg("target"));
    m.def(
        "estimate_visit_prob",
        [](const pcd::Graph& g, std::uint32_t w, std::uint32_t l, std::uint32_t trials,
           std::uint64_t seed) {
            return estimate_dict(pcd::estimate_visit_prob(g, pcd::TrwParams{w, l, 0}, trials, seed));
        },
        py::arg("graph"), py::arg("W"), py::arg("L"), py::arg("trials"), py::arg("seed"));

    m.def(
        "calibrate_threshold",
        [](const pcd::Graph& g, const pcd::TrwRun& run, std::uint32_t pilot_pairs,
           double target_fpr, double target_fnr, std::uint64_t seed) {
            const pcd::CalibrationResult cal = pcd::calibrate_threshold(
                g, run.sets, pilot_pairs, target_fpr, target_fnr, seed);
            py::dict d;
            d["feasible"] = cal.feasible;
            d["threshold"] = cal.threshold;
            d["predicted_fpr"] = cal.predicted_fpr;
            d["predicted_fnr"] = cal.predicted_fnr;
            d["mu_hat"] = cal.mu_hat;
            d["note"] = cal.note;
            return d;
        },
        py::arg("graph"), py::arg("run"), py::arg("pilot_pairs"), py::arg("target_fpr"),
        py::arg("target_fnr"), py::arg("seed"));

    m.def(
        "run_experiment_kv",
        [](const std::string& kv_text, bool allow_full_scale, unsigned threads) {
            pcd::ExperimentConfig cfg = pcd::ExperimentConfig::from_kv_text(kv_text);
            cfg.allow_full_scale = allow_full_scale;
            if (threads) cfg.threads = threads;
            return pcd::run_experiment(cfg).to_json_text();
        },
        py::arg("kv_text"), py::arg("allow_full_scale") = false, py::arg("threads") = 0,
        "Run the full pipeline from a flat key-value config; returns the report JSON text.");

    m.def("preset_kv", [](const std::string& name) {
        return pcd::ExperimentConfig::preset(name).canonical_kv();
    });

    m.attr("__version__") = "0.1.0";
}
