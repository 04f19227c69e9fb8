"""STFT phase-retrieval laboratory."""

import json as _json

from ._core import (
    Error,
    ambiguity_relation_residual,
    cheeger,
    experiments,
    fixture,
    gaussian,
    gluing_bound,
    grid_points,
    hermite,
    instability_ratios,
    modulus_ratio,
    phase_distance,
    phaseless,
    poincare,
    recover,
    sobolev_norm,
    stft,
)
from ._core import run_experiment as _run_experiment


def run_experiment(id, seed=None, params=None, out=""):
    config = {}
    if seed is not None:
        config["seed"] = seed
    if params:
        config["params"] = params
    result = _run_experiment(id, _json.dumps(config) if config else "", str(out))
    result["summary"] = _json.loads(result["summary"])
    return result


__all__ = [
    "Error",
    "ambiguity_relation_residual",
    "cheeger",
    "experiments",
    "fixture",
    "gaussian",
    "gluing_bound",
    "grid_points",
    "hermite",
    "instability_ratios",
    "modulus_ratio",
    "phase_distance",
    "phaseless",
    "poincare",
    "recover",
    "run_experiment",
    "sobolev_norm",
    "stft",
]
