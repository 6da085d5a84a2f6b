"""
Randomized benchmarking and interleaved randomized benchmarking.

Survival is the probability of reading "00" after a random Clifford sequence
and its inversion. Reference and interleaved runs draw their sequences from
the same seeds, so the two decays differ only by the interleaved gate.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Union

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit

from ..calibration.device import Seed, VirtualDevice, child_seed
from ..calibration.programs import CLIFFORD_MARKER, Circuit, state_population
from ..config import RB_LENGTHS, RB_SEQUENCES, RB_SHOTS
from ..dynamics.sidebands import GateType
from ..errors import DomainError, FitDiverged, UnphysicalEstimate
from .clifford import (
    CliffordSequence,
    compile_to_native,
    sample_clifford_sequence,
    single_qubit_cliffords,
)

logger = logging.getLogger(__name__)

DIMENSION = 4

# spawn-key branches below the run seed
_SAMPLE_BRANCH = 0
_SHOT_BRANCH = 1


def rb_fidelity(p: float, d: int = DIMENSION) -> float:
    return 1.0 - (1.0 - p) * (d - 1) / d


def decay_from_fidelity(F: float, d: int = DIMENSION) -> float:
    return 1.0 - (1.0 - F) * d / (d - 1)


def sequence_circuit(
    sequence: CliffordSequence, pair: str, qubits: Sequence[str], gate: GateType
) -> Circuit:
    """Compiled circuit of a sequence; every Clifford ends with a marker"""
    C1 = single_qubit_cliffords()
    first, second = qubits
    circuit = Circuit((first, second))
    for kind, index in sequence.operations():
        if kind == "interleaved":
            circuit.native(pair, gate, (first, second))
            continue
        for step in compile_to_native(index, gate).steps:
            if step.native:
                circuit.native(pair, gate, (first, second))
                continue
            a, b = step.local
            if a:
                circuit.gate(f"c1_{a}", [first], C1[a])
            if b:
                circuit.gate(f"c1_{b}", [second], C1[b])
        circuit.marker(CLIFFORD_MARKER)
    return circuit


@dataclass
class RBData:
    """Survival per sequence; one row per (length, sequence)"""

    pair: str
    gate: GateType
    interleaved: bool
    frame: pd.DataFrame = field(repr=False)

    def summary(self) -> pd.DataFrame:
        return survival_summary(self.frame)


def survival_summary(frame: pd.DataFrame) -> pd.DataFrame:
    """Per-length mean and standard error of the mean"""
    grouped = frame.groupby("length")["survival"]
    out = pd.DataFrame(
        {"mean": grouped.mean(), "sem": grouped.sem(ddof=1).fillna(0.0)}
    )
    out["n"] = grouped.size()
    return out.reset_index().sort_values("length", ignore_index=True)


def run_rb(
    dev: VirtualDevice,
    pair: str,
    lengths: Sequence[int] = RB_LENGTHS,
    n_seq: int = RB_SEQUENCES,
    shots: int = RB_SHOTS,
    seed: Seed = None,
    interleave: bool = False,
    gate: GateType = GateType.CZ02,
) -> RBData:
    """Run n_seq random sequences at every length on one pair

    Sequence seeds are keyed by (length, sequence index), so a reference
    and an interleaved run with the same seed use the same random elements.
    """
    lengths = sorted(set(int(m) for m in lengths))
    if len(lengths) < 2:
        raise DomainError("RB needs at least two distinct lengths")
    if n_seq < 1:
        raise DomainError("n_seq must be at least 1")
    record = dev.topology.pair(pair)
    qubits = (record.fixed, record.tunable)
    interleaved = gate if interleave else None

    rows = []
    for m in lengths:
        for i in range(n_seq):
            sequence = sample_clifford_sequence(
                m, child_seed(seed, _SAMPLE_BRANCH, m, i), interleaved, gate
            )
            circuit = sequence_circuit(sequence, record.label, qubits, gate)
            counts = dev.run(circuit, shots, child_seed(seed, _SHOT_BRANCH, m, i))
            rows.append(
                {"length": m, "sequence": i, "survival": state_population(counts, "00")}
            )
    frame = pd.DataFrame(rows, columns=["length", "sequence", "survival"])
    logger.info(
        "%s on %s: %d sequences", "iRB" if interleave else "RB", record.label, len(rows)
    )
    return RBData(record.label, gate, interleave, frame)


def decay_model(m: np.ndarray, A: float, p: float, B: float) -> np.ndarray:
    return A * p**m + B


@dataclass
class DecayFit:
    A: float
    p: float
    B: float
    covariance: np.ndarray = field(repr=False)
    lengths: np.ndarray = field(repr=False)
    means: np.ndarray = field(repr=False)
    sems: np.ndarray = field(repr=False)

    @property
    def sigma_p(self) -> float:
        return float(np.sqrt(max(self.covariance[1, 1], 0.0)))

    @property
    def fidelity(self) -> float:
        return rb_fidelity(self.p)

    @property
    def fidelity_uncertainty(self) -> float:
        return (DIMENSION - 1) / DIMENSION * self.sigma_p

    def to_dict(self) -> Dict[str, Any]:
        return {
            "A": self.A,
            "p": self.p,
            "B": self.B,
            "sigma_p": self.sigma_p,
            "F_RB": self.fidelity,
            "sigma_F_RB": self.fidelity_uncertainty,
        }


def fit_decay(data: Union[RBData, pd.DataFrame]) -> DecayFit:
    """Weighted fit of A p^m + B to per-length mean survival

    Data without a significant trend is reported as p = 1; data that rises
    with length raises FitDiverged.
    """
    frame = data.frame if isinstance(data, RBData) else data
    summary = survival_summary(frame)
    if len(summary) < 3:
        raise DomainError("decay fit needs at least three lengths")
    m = summary["length"].to_numpy(dtype=float)
    y = summary["mean"].to_numpy(dtype=float)
    sem = summary["sem"].to_numpy(dtype=float)

    noise = max(3.0 * float(sem.max()), 1e-9)
    change = float(np.polyfit(m, y, 1)[0]) * float(m.max() - m.min())
    if abs(change) <= noise and float(np.ptp(y)) <= noise:
        logger.debug("no decay above noise; reporting p = 1")
        return DecayFit(0.0, 1.0, float(y.mean()), np.zeros((3, 3)), m, y, sem)
    if change > 0:
        raise FitDiverged("survival increases with sequence length")

    positive = sem[sem > 0]
    sigma = np.where(sem > 0, sem, positive.min()) if positive.size else None
    B0 = 0.25
    A0 = max(y[0] - B0, 0.05)
    ratio = max(y[-1] - B0, 1e-3) / A0
    p0 = float(np.clip(ratio ** (1.0 / (m[-1] - m[0])), 0.5, 0.999))
    try:
        params, cov = curve_fit(
            decay_model,
            m,
            y,
            p0=[A0, p0, B0],
            sigma=sigma,
            absolute_sigma=sigma is not None,
            bounds=([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]),
        )
    except (RuntimeError, ValueError) as e:
        raise FitDiverged(f"decay fit failed: {e}") from e
    if not np.all(np.isfinite(cov)):
        raise FitDiverged("decay fit returned no covariance")
    A, p, B = (float(v) for v in params)
    if p <= 0:
        raise FitDiverged("decay parameter collapsed to zero")
    logger.debug("decay fit A=%.4f p=%.5f B=%.4f", A, p, B)
    return DecayFit(A, p, B, cov, m, y, sem)


@dataclass(frozen=True)
class IRBEstimate:
    fidelity: float
    uncertainty: float
    ratio: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "F_iRB": self.fidelity,
            "sigma_F_iRB": self.uncertainty,
            "ratio": self.ratio,
        }


def irb_fidelity(
    p_ref: float,
    p_int: float,
    sigma_ref: float = 0.0,
    sigma_int: float = 0.0,
) -> IRBEstimate:
    """Gate fidelity from the ratio of interleaved and reference decays"""
    for name, p in (("p_ref", p_ref), ("p_int", p_int)):
        if not 0.0 < p <= 1.0:
            raise DomainError(f"{name}={p} outside (0, 1]")
    ratio = p_int / p_ref
    relative = float(np.hypot(sigma_ref / p_ref, sigma_int / p_int))
    if ratio > 1.0 + 3.0 * relative and ratio - 1.0 > 1e-12:
        raise UnphysicalEstimate(
            f"interleaved decay {p_int:.5f} exceeds reference {p_ref:.5f} "
            "beyond its uncertainty"
        )
    fidelity = 1.0 - (DIMENSION - 1) * (1.0 - ratio) / DIMENSION
    uncertainty = (DIMENSION - 1) / DIMENSION * ratio * relative
    return IRBEstimate(min(fidelity, 1.0), uncertainty, ratio)


def irb_from_fits(reference: DecayFit, interleaved: DecayFit) -> IRBEstimate:
    return irb_fidelity(
        reference.p, interleaved.p, reference.sigma_p, interleaved.sigma_p
    )
