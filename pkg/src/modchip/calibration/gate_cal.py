"""
Chevron-based calibration of parametric two-qubit gates.

A coarse (f_p, t) chevron locates the resonance: transfer is maximized over
t for every f_p and a parabola through the top three points gives f_p*. A
fine frequency scan then fixes f_p*, and a sin^2 fit to a fine duration scan
gives the gate time (first full transfer for iSWAP, 2 pi return for CZ).
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from ..config import CALIBRATION_SHOTS, MIN_TRANSFER
from ..dynamics.gates import predicted_gate_time
from ..dynamics.pulses import Envelope, FluxPulse
from ..dynamics.sidebands import GateType
from ..dynamics.system import pair_system
from ..errors import ModchipError, NoTransfer, OutOfBand
from .device import Seed, VirtualDevice, spawn_seeds
from .programs import Counts, PulseProgram, state_population

logger = logging.getLogger(__name__)

COARSE_HALF_WIDTH_MHZ = 30.0
COARSE_POINTS = 31
FINE_POINTS = 21
DEFAULT_MAX_DURATION_NS = 1000.0


@dataclass
class GateCalibration:
    pair: str
    gate: GateType
    f_p_star: float  # MHz
    t_gate: float  # ns
    phi_ac: float
    g_eff: float  # MHz
    timestamp: float  # device clock, s
    max_transfer: float
    envelope: Envelope = Envelope.RECTANGULAR

    def pulse(self) -> FluxPulse:
        return FluxPulse(
            phi_dc=0.0,
            phi_ac=self.phi_ac,
            f_p=self.f_p_star,
            duration=self.t_gate,
            envelope=self.envelope,
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["gate"] = self.gate.value
        data["envelope"] = self.envelope.value
        return data


def _prepared_state(gate: GateType) -> str:
    return "01" if gate is GateType.ISWAP else "11"


def transfer(counts: Counts, gate: GateType) -> float:
    """Population moved by the exchange: into |10> for iSWAP, out of |11> for CZ"""
    if gate is GateType.ISWAP:
        return state_population(counts, "10")
    return 1.0 - state_population(counts, "11")


def _vertex(x: np.ndarray, y: np.ndarray, i: int) -> float:
    """Abscissa of the parabola through the points around index i"""
    lo = min(max(i - 1, 0), x.size - 3)
    xs, ys = x[lo : lo + 3], y[lo : lo + 3]
    a, b, _ = np.polyfit(xs, ys, 2)
    if a >= 0:
        return float(x[i])
    return float(np.clip(-b / (2.0 * a), xs[0], xs[-1]))


def _transfer_model(t: np.ndarray, A: float, T: float) -> np.ndarray:
    return A * np.sin(0.5 * np.pi * t / T) ** 2


def _transfer_peak(t: np.ndarray, y: np.ndarray, t0: float) -> float:
    """Time of first full transfer from a sin^2 fit over the whole trace"""
    try:
        params, _ = curve_fit(
            _transfer_model,
            t,
            y,
            p0=[max(float(y.max()), 0.5), t0],
            bounds=([0.0, 0.25 * t0], [1.0, 4.0 * t0]),
        )
    except (RuntimeError, ValueError) as e:
        logger.debug("sin^2 fit failed (%s); using the parabola vertex", e)
        return _vertex(t, y, int(np.argmax(y)))
    return float(params[1])


@dataclass
class _Scanner:
    dev: VirtualDevice
    pair: str
    gate: GateType
    phi_ac: float
    shots: int
    envelope: Envelope

    def __call__(
        self, f_p: float, durations: Sequence[float], seed: np.random.SeedSequence
    ) -> np.ndarray:
        longest = float(max(durations))
        pulse = FluxPulse(0.0, self.phi_ac, f_p, longest, envelope=self.envelope)
        program = PulseProgram(
            self.pair,
            pulse,
            tuple(float(t) for t in durations),
            _prepared_state(self.gate),
        )
        counts = self.dev.execute(program, self.shots, seed)
        return np.array([transfer(c, self.gate) for c in counts])


def _check_band(f_p: float, band: Tuple[float, float], pair: str) -> None:
    if not band[0] <= f_p <= band[1]:
        raise OutOfBand(
            f"{pair}: resonance {f_p:.1f} MHz outside control band "
            f"[{band[0]:.0f}, {band[1]:.0f}] MHz"
        )


def calibrate_gate(
    dev: VirtualDevice,
    pair: str,
    gate: GateType,
    f_p_grid: Optional[Sequence[float]] = None,
    t_grid: Optional[Sequence[float]] = None,
    phi_ac: Optional[float] = None,
    shots: int = CALIBRATION_SHOTS,
    seed: Seed = None,
    envelope: Envelope = Envelope.RECTANGULAR,
) -> GateCalibration:
    """Locate the resonance and gate time of a pair from chevron scans"""
    topology = dev.topology
    record = topology.pair(pair)
    band = topology.control_band_MHz
    phi_ac = record.phi_ac if phi_ac is None else phi_ac
    system = pair_system(topology, record.label)

    try:
        f_pred, t_pred = predicted_gate_time(system, gate, phi_ac)
    except ModchipError as e:
        logger.warning("%s: no model prediction (%s)", record.label, e)
        f_pred, t_pred = float(np.mean(band)), DEFAULT_MAX_DURATION_NS / 2
    if f_p_grid is None:
        _check_band(f_pred, band, record.label)
        half_width = COARSE_HALF_WIDTH_MHZ
        f_p_grid = np.linspace(f_pred - half_width, f_pred + half_width, COARSE_POINTS)
    f_values = np.asarray(f_p_grid, dtype=float)
    f_values = f_values[(f_values >= band[0]) & (f_values <= band[1])]
    if f_values.size < 3:
        raise OutOfBand(f"{record.label}: scan window lies outside the control band")
    half_time = t_pred if gate is GateType.ISWAP else t_pred / 2.0
    if t_grid is None:
        t_grid = np.linspace(
            half_time / 10.0, min(2.5 * half_time, DEFAULT_MAX_DURATION_NS), 26
        )
    times = np.asarray(t_grid, dtype=float)

    scan = _Scanner(dev, record.label, gate, phi_ac, shots, envelope)
    seeds = spawn_seeds(seed, f_values.size + FINE_POINTS + 1)
    coarse = np.vstack([scan(f, times, seeds[i]) for i, f in enumerate(f_values)])
    profile = coarse.max(axis=1)
    best = int(np.argmax(profile))
    if profile[best] < MIN_TRANSFER:
        raise NoTransfer(
            f"{record.label}: maximum transfer {profile[best]:.2f} below {MIN_TRANSFER}"
        )
    f_coarse = _vertex(f_values, profile, best)
    t_coarse = float(times[int(np.argmax(coarse[best]))])

    step = float(np.median(np.diff(f_values))) if f_values.size > 1 else 1.0
    f_fine = np.linspace(f_coarse - 2 * step, f_coarse + 2 * step, FINE_POINTS)
    fine_seeds = seeds[f_values.size : -1]
    fine_profile = np.array(
        [scan(f, [t_coarse], s)[0] for f, s in zip(f_fine, fine_seeds)]
    )
    f_star = _vertex(f_fine, fine_profile, int(np.argmax(fine_profile)))
    _check_band(f_star, band, record.label)

    t_fine = np.linspace(0.5 * t_coarse, 1.5 * t_coarse, 41)
    trace = scan(f_star, t_fine, seeds[-1])
    t_peak = _transfer_peak(t_fine, trace, t_coarse)
    t_gate = t_peak if gate is GateType.ISWAP else 2.0 * t_peak
    g_eff = 1e3 / (4.0 * t_gate) if gate is GateType.ISWAP else 1e3 / (2.0 * t_gate)

    calibration = GateCalibration(
        pair=record.label,
        gate=gate,
        f_p_star=f_star,
        t_gate=t_gate,
        phi_ac=phi_ac,
        g_eff=g_eff,
        timestamp=dev.clock,
        max_transfer=float(trace.max()),
        envelope=envelope,
    )
    logger.info(
        "%s %s calibrated: f_p*=%.2f MHz t_gate=%.1f ns g_eff=%.3f MHz",
        record.label,
        gate.value,
        f_star,
        t_gate,
        g_eff,
    )
    return calibration
