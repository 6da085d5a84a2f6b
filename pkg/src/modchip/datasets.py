"""
Reference datasets bundled with the package.

Each loader returns a fresh pandas DataFrame read from ``modchip/data``.
"""

from importlib import resources
from pathlib import Path
from typing import Any, Dict

import json

import pandas as pd

DATA_PACKAGE = "modchip.data"


def data_path(name: str) -> Path:
    """Filesystem path of a bundled data file"""
    return Path(str(resources.files(DATA_PACKAGE).joinpath(name)))


def _read_csv(name: str) -> pd.DataFrame:
    return pd.read_csv(data_path(name))


def load_design_targets() -> pd.DataFrame:
    """Design Hamiltonian targets per design class (I-IV)"""
    return _read_csv("design_targets.csv")


def load_bump_couplings() -> pd.DataFrame:
    """Post-bond bump heights with measured and simulated couplings per pair"""
    return _read_csv("bump_couplings.csv")


def load_gate_performance() -> pd.DataFrame:
    """Coherence under modulation, fidelities and gate times per calibrated pair"""
    return _read_csv("gate_performance.csv")


def load_bell_marginals() -> pd.DataFrame:
    """Per-pair Bell witness values from the simultaneous experiment"""
    return _read_csv("bell_marginals.csv")


def load_json(name: str) -> Dict[str, Any]:
    with open(data_path(name), "r", encoding="utf-8") as f:
        return json.load(f)
