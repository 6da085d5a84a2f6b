"""
Bell witness W = sqrt(2) (<XX> + <ZZ>) and the simultaneous multi-pair test.

With S = (X + Z)/sqrt(2) and T = (X - Z)/sqrt(2) on the second qubit the
CHSH combination QS + RS + RT - QT reduces to sqrt(2) (XX + ZZ), which is
2 sqrt(2) on (|00> + |11>)/sqrt(2). Taking the other labelling of S and T
gives sqrt(2) (XX - ZZ), which vanishes on that state. Counts are used as
measured: no readout correction is applied.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from ..calibration.device import Seed, VirtualDevice, spawn_seeds
from ..calibration.programs import Circuit, Counts
from ..config import BELL_PAIRS, BELL_RUNS, BELL_SHOTS
from ..dynamics.sidebands import GateType
from ..errors import DomainError, EmptyCounts, NonDisjointPairs
from .circuits import BellBasis, BellCircuit, build_bell_circuit

logger = logging.getLogger(__name__)

SQRT2 = float(np.sqrt(2.0))
CLASSICAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * SQRT2


def parity_expectation(
    counts: Counts, positions: Tuple[int, int] = (0, 1)
) -> Tuple[float, float]:
    """<(-1)^(a xor b)> over the two bit positions and its binomial error"""
    total = sum(counts.values())
    if total == 0:
        raise EmptyCounts("no shots in counts")
    i, j = positions
    even = sum(n for key, n in counts.items() if key[i] == key[j])
    p = min(max(even / total, 0.5 / total), 1.0 - 0.5 / total)
    return 2.0 * even / total - 1.0, float(2.0 * np.sqrt(p * (1.0 - p) / total))


@dataclass
class WitnessResult:
    pair: str
    zz: float
    xx: float
    zz_err: float
    xx_err: float
    w: float
    w_err: float  # spread of single-run values (binomial for one run)
    w_sem: float
    n_runs: int
    shots_per_basis: int
    runs: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    def violation(self) -> float:
        return violation_sigma(self.w, self.w_err)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pair": self.pair,
            "ZZ": self.zz,
            "ZZ_err": self.zz_err,
            "XX": self.xx,
            "XX_err": self.xx_err,
            "W": self.w,
            "W_err": self.w_err,
            "W_sem": self.w_sem,
            "n_runs": self.n_runs,
            "shots_per_basis": self.shots_per_basis,
            "violation_sigma": self.violation(),
        }


def witness_from_counts(
    zz_counts: Counts,
    xx_counts: Counts,
    pair: str = "",
    positions: Tuple[int, int] = (0, 1),
) -> WitnessResult:
    zz, zz_err = parity_expectation(zz_counts, positions)
    xx, xx_err = parity_expectation(xx_counts, positions)
    w = SQRT2 * (xx + zz)
    w_err = SQRT2 * float(np.hypot(xx_err, zz_err))
    shots = min(sum(zz_counts.values()), sum(xx_counts.values()))
    return WitnessResult(
        pair, zz, xx, zz_err, xx_err, w, w_err, w_err, 1, shots, np.array([w])
    )


def combine_runs(pair: str, runs: Sequence[WitnessResult]) -> WitnessResult:
    """Mean over runs; error is the run-to-run spread"""
    if not runs:
        raise DomainError("no runs to combine")
    w = np.array([r.w for r in runs])
    zz = np.array([r.zz for r in runs])
    xx = np.array([r.xx for r in runs])
    n = len(runs)
    if n > 1:
        w_err, zz_err, xx_err = (float(v.std(ddof=1)) for v in (w, zz, xx))
    else:
        w_err, zz_err, xx_err = runs[0].w_err, runs[0].zz_err, runs[0].xx_err
    return WitnessResult(
        pair=pair,
        zz=float(zz.mean()),
        xx=float(xx.mean()),
        zz_err=zz_err,
        xx_err=xx_err,
        w=float(w.mean()),
        w_err=w_err,
        w_sem=w_err / np.sqrt(n),
        n_runs=n,
        shots_per_basis=runs[0].shots_per_basis,
        runs=w,
    )


def bounds(N: int) -> Tuple[float, float]:
    """(classical, quantum) bounds on the sum of N witnesses"""
    if N < 1:
        raise DomainError("need at least one pair")
    return CLASSICAL_BOUND * N, TSIRELSON_BOUND * N


def violation_sigma(
    w: float, sigma: float, classical: float = CLASSICAL_BOUND
) -> float:
    """Standard deviations by which w exceeds the classical bound"""
    if sigma <= 0:
        return float("inf") if w > classical else 0.0
    return (w - classical) / sigma


@dataclass
class BellExperiment:
    pairs: Tuple[str, ...]
    results: Dict[str, WitnessResult]
    runs: pd.DataFrame = field(repr=False)

    @property
    def w_sum(self) -> float:
        return float(sum(r.w for r in self.results.values()))

    @property
    def w_sum_err(self) -> float:
        return float(np.sqrt(sum(r.w_err**2 for r in self.results.values())))

    def violation(self) -> float:
        classical, _ = bounds(len(self.pairs))
        return violation_sigma(self.w_sum, self.w_sum_err, classical)

    def summary(self) -> Dict[str, Any]:
        classical, quantum = bounds(len(self.pairs))
        return {
            "pairs": {p: self.results[p].to_dict() for p in self.pairs},
            "W_sum": self.w_sum,
            "W_sum_err": self.w_sum_err,
            "classical_bound": classical,
            "quantum_bound": quantum,
            "violation_sigma": self.violation(),
        }


def _check_disjoint(circuits: Sequence[BellCircuit]) -> None:
    seen: Dict[str, str] = {}
    for bc in circuits:
        for q in bc.qubits:
            if q in seen:
                raise NonDisjointPairs(f"{bc.pair} and {seen[q]} share qubit {q}")
            seen[q] = bc.pair


def _joint_circuit(circuits: Sequence[BellCircuit]) -> Circuit:
    qubits = tuple(q for bc in circuits for q in bc.qubits)
    joint = Circuit(qubits)
    for bc in circuits:
        joint.extend(bc.circuit)
    return joint


def run_bell_experiment(
    dev: VirtualDevice,
    pairs: Sequence[str] = BELL_PAIRS,
    n_runs: int = BELL_RUNS,
    shots: int = BELL_SHOTS,
    seed: Seed = None,
    gate: GateType = GateType.CZ02,
) -> BellExperiment:
    """Drive all pairs in one circuit per basis and run, then combine per pair"""
    if n_runs < 1:
        raise DomainError("n_runs must be at least 1")
    per_basis = {
        basis: [build_bell_circuit(dev.topology, p, basis, gate) for p in pairs]
        for basis in BellBasis
    }
    zz_circuits = per_basis[BellBasis.ZZ]
    _check_disjoint(zz_circuits)
    labels = tuple(bc.pair for bc in zz_circuits)
    joint = {basis: _joint_circuit(circuits) for basis, circuits in per_basis.items()}

    per_pair: Dict[str, List[WitnessResult]] = {p: [] for p in labels}
    rows = []
    for run, run_seed in enumerate(spawn_seeds(seed, n_runs)):
        zz_seed, xx_seed = spawn_seeds(run_seed, 2)
        zz_counts = dev.run(joint[BellBasis.ZZ], shots, zz_seed)
        xx_counts = dev.run(joint[BellBasis.XX], shots, xx_seed)
        for k, label in enumerate(labels):
            positions = (2 * k, 2 * k + 1)
            result = witness_from_counts(zz_counts, xx_counts, label, positions)
            per_pair[label].append(result)
            rows.append(
                {
                    "run": run,
                    "pair": label,
                    "ZZ": result.zz,
                    "XX": result.xx,
                    "W": result.w,
                }
            )
    results = {label: combine_runs(label, per_pair[label]) for label in labels}
    experiment = BellExperiment(labels, results, pd.DataFrame(rows))
    logger.info(
        "Bell test on %d pairs: W_sum = %.3f +- %.3f",
        len(labels),
        experiment.w_sum,
        experiment.w_sum_err,
    )
    return experiment


def witness_histogram(values: Sequence[float], bins: int = 20) -> pd.DataFrame:
    """Bin edges and counts of single-run witness values"""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    return pd.DataFrame(
        {"bin_left": edges[:-1], "bin_right": edges[1:], "count": counts}
    )


def witness_for_depolarizing(lam: float, readout_error: float = 0.0) -> float:
    """Witness of the ideal circuit after depolarizing lam and readout flips"""
    return TSIRELSON_BOUND * (1.0 - lam) * (1.0 - 2.0 * readout_error) ** 2


def depolarizing_for_witness(w: float, readout_error: float = 0.0) -> float:
    contraction = (1.0 - 2.0 * readout_error) ** 2
    if not 0 < w <= TSIRELSON_BOUND * contraction:
        raise DomainError(f"witness {w} unreachable at readout error {readout_error}")
    return 1.0 - w / (TSIRELSON_BOUND * contraction)
