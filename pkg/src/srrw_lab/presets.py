"""Desk-scale experiment presets.

These reproduce the headline figures at CI-friendly sizes; the deviations
from the full-scale runs (cycle length 333 with 50000 replicas, hypercube
curves at 30000 replicas) are deliberate and documented per preset.
"""

from __future__ import annotations

import copy

from .config import SCHEMA_VERSION

PRESETS = {
    "fig1-cycle-desk": {
        "description": (
            "TV decay on a cycle for several reinforcement strengths "
            "(desk scale: L=101 and 20000 replicas instead of L=333 / 50000)"
        ),
        "config": {
            "schema_version": SCHEMA_VERSION,
            "kind": "tv-curve",
            "group": {"kind": "cyclic", "L": 101},
            "mu": {"type": "simple-cycle"},
            "alphas": [0.0, 0.5, 0.75, 0.9],
            "grid": {"type": "geometric", "n_max": 30000},
            "replicas": 20000,
            "seed": 20260810,
            "estimator": "rao-blackwell",
            "output_dir": "srrw-out/fig1",
        },
    },
    "fig2-hypercube-desk": {
        "description": (
            "TV decay for the reinforced lazy walk on the hypercube "
            "(desk scale: d=128 and 10000 replicas instead of 30000)"
        ),
        "config": {
            "schema_version": SCHEMA_VERSION,
            "kind": "tv-curve",
            "group": {"kind": "hypercube", "d": 128},
            "mu": {"type": "lazy-hypercube"},
            "alphas": [0.0, 0.5],
            "grid": {"type": "geometric", "n_max": 4000},
            "replicas": 10000,
            "seed": 20260810,
            "estimator": "hypercube-weight",
            "output_dir": "srrw-out/fig2",
        },
    },
    "phase-transition-desk": {
        "description": "Mixing-time scaling in L on cycles, below and above alpha = 1/2",
        "config": {
            "schema_version": SCHEMA_VERSION,
            "kind": "phase-transition",
            "group": {"kind": "cyclic", "L": 33},
            "mu": {"type": "simple-cycle"},
            "alphas": [0.25, 0.75],
            "sizes": [33, 65, 129],
            "epsilons": [0.25],
            "replicas": 20000,
            "seed": 20260810,
            "estimator": "rao-blackwell",
            "output_dir": "srrw-out/phase",
        },
    },
    "cutoff-desk": {
        "description": "Hypercube cutoff constants t_mix(eps)/(d log d) at desk scale",
        "config": {
            "schema_version": SCHEMA_VERSION,
            "kind": "cutoff",
            "group": {"kind": "hypercube", "d": 256},
            "mu": {"type": "lazy-hypercube"},
            "alphas": [0.5],
            "sizes": [64, 128, 256],
            "epsilons": [0.25, 0.1, 0.9],
            "replicas": 10000,
            "seed": 20260810,
            "estimator": "hypercube-weight",
            "output_dir": "srrw-out/cutoff",
        },
    },
    "oracle-z2": {
        "description": "Exact small-n law on the two-element group; P(S_2=0) = (1+alpha)/2",
        "config": {
            "schema_version": SCHEMA_VERSION,
            "kind": "oracle-check",
            "group": {"kind": "cyclic", "L": 2},
            "mu": {"type": "uniform"},
            "alphas": [0.0, 0.3, 0.5, 0.7],
            "n_max": 6,
            "replicas": 1,
            "seed": 20260810,
            "estimator": "exact",
            "output_dir": "srrw-out/oracle-z2",
        },
    },
    "forest-stats-desk": {
        "description": "Cluster-size statistics of the percolated recursive tree",
        "config": {
            "schema_version": SCHEMA_VERSION,
            "kind": "forest-stats",
            "group": {"kind": "cyclic", "L": 3},
            "mu": {"type": "simple-cycle"},
            "alphas": [0.2, 0.5, 0.8],
            "grid": {"type": "explicit", "values": [10000]},
            "replicas": 100,
            "seed": 20260810,
            "estimator": "exact",
            "output_dir": "srrw-out/forest",
        },
    },
    "profiles-lazy-z5": {
        "description": "Exhaustive isoperimetric and root profiles of the lazy 5-cycle",
        "config": {
            "schema_version": SCHEMA_VERSION,
            "kind": "profiles",
            "group": {"kind": "cyclic", "L": 5},
            "mu": {"type": "lazy-cycle"},
            "alphas": [0.5],
            "replicas": 1,
            "seed": 20260810,
            "estimator": "exact",
            "output_dir": "srrw-out/profiles",
        },
    },
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def preset_config(name: str) -> dict:
    return copy.deepcopy(PRESETS[name]["config"])


def preset_description(name: str) -> str:
    return PRESETS[name]["description"]
