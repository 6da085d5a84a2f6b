"""
Retune loop and long-running fidelity timeseries.

One retune parks the tunable qubit at its sweet spot, calibrates the readout
classifier, probes T1 on both qubits and recalibrates the gate. Stages run
independently; failures are collected by stage name and raised together
with the partial record.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit

from ..benchmarking.policy import quote_policy
from ..benchmarking.rb import fit_decay, irb_from_fits, run_rb
from ..config import CALIBRATION_SHOTS, RB_LENGTHS, RB_SEQUENCES, RB_SHOTS
from ..device.transmon import transmon_levels
from ..dynamics.sidebands import GateType
from ..errors import DomainError, FitDiverged, ModchipError, PipelineError
from .device import Seed, VirtualDevice, spawn_seeds
from .gate_cal import GateCalibration, calibrate_gate
from .programs import Circuit, population

logger = logging.getLogger(__name__)

T1_DELAYS_NS = tuple(np.linspace(0.0, 150_000.0, 31))


@dataclass
class ParkResult:
    pair: str
    tunable: str
    phi_dc: float
    f01_fixed: float  # MHz
    f01_tunable: float  # MHz


def park(dev: VirtualDevice, pair: str) -> ParkResult:
    """Park the tunable qubit at zero flux, its maximum frequency"""
    record = dev.topology.pair(pair)
    fixed = dev.topology.qubit(record.fixed).spec
    tunable = dev.topology.qubit(record.tunable).spec
    return ParkResult(
        pair=record.label,
        tunable=record.tunable,
        phi_dc=0.0,
        f01_fixed=transmon_levels(fixed, 0.0).f01,
        f01_tunable=transmon_levels(tunable, 0.0).f01,
    )


@dataclass
class ReadoutCalibration:
    qubit: str
    p1_given_0: float
    p0_given_1: float

    @property
    def misclassification(self) -> float:
        return 0.5 * (self.p1_given_0 + self.p0_given_1)

    @property
    def assignment_fidelity(self) -> float:
        return 1.0 - self.misclassification


def calibrate_readout(
    dev: VirtualDevice,
    qubits: Sequence[str],
    shots: int = CALIBRATION_SHOTS,
    seed: Seed = None,
) -> Dict[str, ReadoutCalibration]:
    """Ground and excited reference shots on every qubit at once"""
    qubits = tuple(qubits)
    ground_seed, excited_seed = spawn_seeds(seed, 2)
    ground = dev.run(Circuit(qubits), shots, ground_seed)
    excited_circuit = Circuit(qubits)
    for q in qubits:
        excited_circuit.x(q)
    excited = dev.run(excited_circuit, shots, excited_seed)
    return {
        q: ReadoutCalibration(
            qubit=q,
            p1_given_0=population(ground, 1, i),
            p0_given_1=population(excited, 0, i),
        )
        for i, q in enumerate(qubits)
    }


@dataclass
class T1Result:
    qubit: str
    T1: float  # us
    uncertainty: float  # us
    delays: np.ndarray = field(repr=False)
    populations: np.ndarray = field(repr=False)


def _relaxation(t: np.ndarray, A: float, T1: float, B: float) -> np.ndarray:
    return A * np.exp(-t / T1) + B


def measure_t1(
    dev: VirtualDevice,
    qubit: str,
    delays: Optional[Sequence[float]] = None,
    shots: int = CALIBRATION_SHOTS,
    seed: Seed = None,
) -> T1Result:
    """Excite, wait, measure; fit an exponential to the excited population"""
    t = np.asarray(T1_DELAYS_NS if delays is None else delays, dtype=float)
    if t.size < 4:
        raise DomainError("T1 probe needs at least four delays")
    seeds = spawn_seeds(seed, t.size)
    p = np.array(
        [
            population(dev.run(Circuit((qubit,)).x(qubit).idle(dt, [qubit]), shots, s))
            for dt, s in zip(t, seeds)
        ]
    )
    clipped = np.clip(p, 1.0 / shots, 1.0 - 1.0 / shots)
    sigma = np.sqrt(clipped * (1.0 - clipped) / shots)
    span = float(t.max() - t.min())
    p0 = [max(float(p[0] - p[-1]), 0.1), span / 3.0, float(p[-1])]
    try:
        params, cov = curve_fit(
            _relaxation,
            t,
            p,
            p0=p0,
            sigma=sigma,
            absolute_sigma=True,
            bounds=([0.0, 1.0, 0.0], [1.0, 1e9, 1.0]),
        )
    except (RuntimeError, ValueError) as e:
        raise FitDiverged(f"T1 fit on {qubit} failed: {e}") from e
    T1_ns = float(params[1])
    uncertainty = float(np.sqrt(cov[1, 1])) if np.isfinite(cov[1, 1]) else np.inf
    logger.debug("%s: T1 = %.2f us", qubit, T1_ns * 1e-3)
    return T1Result(qubit, T1_ns * 1e-3, uncertainty * 1e-3, t, p)


@dataclass
class RetuneRecord:
    pair: str
    gate: GateType
    timestamp: float
    park: Optional[ParkResult] = None
    readout: Dict[str, ReadoutCalibration] = field(default_factory=dict)
    t1: Dict[str, T1Result] = field(default_factory=dict)
    calibration: Optional[GateCalibration] = None
    stage_errors: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pair": self.pair,
            "gate": self.gate.value,
            "timestamp_s": self.timestamp,
            "f01_tunable_MHz": self.park.f01_tunable if self.park else None,
            "misclassification": {
                q: r.misclassification for q, r in self.readout.items()
            },
            "T1_us": {q: r.T1 for q, r in self.t1.items()},
            "calibration": self.calibration.to_dict() if self.calibration else None,
            "stage_errors": dict(self.stage_errors),
        }


def retune_pipeline(
    dev: VirtualDevice,
    pair: str,
    gate: GateType,
    seed: Seed = None,
    shots: int = CALIBRATION_SHOTS,
    t1_delays: Optional[Sequence[float]] = None,
    f_p_grid: Optional[Sequence[float]] = None,
    t_grid: Optional[Sequence[float]] = None,
) -> RetuneRecord:
    """park -> readout -> T1 -> gate calibration; installs the calibrated pulse"""
    record = RetuneRecord(pair=pair, gate=gate, timestamp=dev.clock)
    errors: Dict[str, Exception] = {}
    readout_seed, t1_seed, gate_seed = spawn_seeds(seed, 3)

    try:
        record.park = park(dev, pair)
        record.pair = record.park.pair
    except ModchipError as e:
        errors["park"] = e
        raise PipelineError(errors, record) from e
    qubits = (dev.topology.pair(pair).fixed, record.park.tunable)

    try:
        record.readout = calibrate_readout(dev, qubits, shots, readout_seed)
    except ModchipError as e:
        errors["readout"] = e
    try:
        seeds = spawn_seeds(t1_seed, len(qubits))
        for q, s in zip(qubits, seeds):
            record.t1[q] = measure_t1(dev, q, t1_delays, shots, s)
    except ModchipError as e:
        errors["t1"] = e
    try:
        record.calibration = calibrate_gate(
            dev, pair, gate, f_p_grid, t_grid, shots=shots, seed=gate_seed
        )
        dev.set_gate_pulse(pair, gate, record.calibration.pulse())
    except ModchipError as e:
        errors["gate"] = e

    record.stage_errors = {stage: str(e) for stage, e in errors.items()}
    if errors:
        for stage, e in errors.items():
            logger.warning("%s retune stage %s failed: %s", record.pair, stage, e)
        raise PipelineError(errors, record)
    return record


def run_timeseries(
    dev: VirtualDevice,
    pair: str,
    gate: GateType,
    n_points: int,
    interval_s: float,
    seed: Seed = None,
    lengths: Sequence[int] = RB_LENGTHS,
    n_seq: int = RB_SEQUENCES,
    shots: int = RB_SHOTS,
    retune_options: Optional[Dict[str, Any]] = None,
) -> pd.DataFrame:
    """Retune and benchmark repeatedly, advancing the device clock in between"""
    if n_points < 1 or interval_s < 0:
        raise DomainError("timeseries needs n_points >= 1 and interval_s >= 0")
    rows: List[Dict[str, Any]] = []
    for i, point_seed in enumerate(spawn_seeds(seed, n_points)):
        if i:
            dev.advance(interval_s)
        retune_seed, rb_seed = spawn_seeds(point_seed, 2)
        row: Dict[str, Any] = {"point": i, "clock_s": dev.clock}
        try:
            options = retune_options or {}
            record = retune_pipeline(dev, pair, gate, retune_seed, **options)
        except PipelineError as e:
            record = e.record
            row["error"] = str(e)
        for q, result in record.t1.items():
            row[f"T1_{q}_us"] = result.T1
        if record.calibration is not None:
            row["f_p_star_MHz"] = record.calibration.f_p_star
            row["t_gate_ns"] = record.calibration.t_gate
            try:
                reference = fit_decay(
                    run_rb(dev, pair, lengths, n_seq, shots, rb_seed, False, gate)
                )
                interleaved = fit_decay(
                    run_rb(dev, pair, lengths, n_seq, shots, rb_seed, True, gate)
                )
                irb = irb_from_fits(reference, interleaved)
                quoted = quote_policy(reference.fidelity, irb.fidelity)
                row.update(
                    {
                        "F_RB": reference.fidelity,
                        "F_iRB": irb.fidelity,
                        "quoted": quoted.value,
                        "flag": quoted.flag,
                    }
                )
            except ModchipError as e:
                row["error"] = str(e)
        rows.append(row)
        logger.info("timeseries point %d/%d at %.0f s", i + 1, n_points, row["clock_s"])
    return pd.DataFrame(rows)
