"""Privacy-preserving decentralized community detection simulator.

Thin wrapper around the compiled core: community-based random graphs,
truncated random walks, PSI-style pairwise decisions, error/advantage
bounds and the end-to-end experiment pipeline.
"""

import json as _json

from ._pcdsim import (  # noqa: F401
    CbrgParams,
    Graph,
    PsiVariant,
    TrwParams,
    TrwRun,
    adv_bound,
    build_row,
    calibrate_threshold,
    decide_pair,
    empirical_error_rates,
    estimate_visit_prob,
    fnr_bound,
    fpr_bound,
    generate,
    invert_phi,
    invert_visit_prob,
    load_graph,
    locality,
    preset_kv,
    run_experiment_kv,
    run_psi,
    run_trw,
    __version__,
)


def run_experiment(config_text, allow_full_scale=False, threads=0):
    """Run the pipeline from flat key-value config text; returns the report dict."""
    return _json.loads(run_experiment_kv(config_text, allow_full_scale, threads))


def preset(name):
    """Key-value config text for a named preset ("desk", "paper-4.3")."""
    return preset_kv(name)
