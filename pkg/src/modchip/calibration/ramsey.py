"""
Time-Ramsey frequency estimation and qubit-qubit dispersive shift.

Each delay point runs X/2 - idle(dt) - Z(2 pi dt df) - X/2 so the excited
population oscillates at the artificial detuning df plus the qubit's own
offset from the drive frame.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from ..config import (
    CALIBRATION_SHOTS,
    RAMSEY_DETUNING_MHZ,
    RAMSEY_MIN_VISIBILITY,
    RAMSEY_POINTS,
    RAMSEY_SPAN_NS,
)
from ..coupling.dispersive import DispersiveShift, ProbeDirection
from ..device.transmon import transmon_levels
from ..errors import DomainError, FitDiverged
from .device import Seed, VirtualDevice, child_seed, spawn_seeds
from .programs import Circuit, population

logger = logging.getLogger(__name__)


@dataclass
class RamseyResult:
    qubit: str
    frequency: float  # fitted oscillation, MHz
    uncertainty: float  # MHz
    f01: float  # MHz
    visibility: float
    delta_f: float
    frame_f01: float
    delays: np.ndarray = field(repr=False)
    populations: np.ndarray = field(repr=False)
    decay_ns: float = float("inf")
    two_sided: bool = False

    @property
    def offset(self) -> float:
        """Qubit frequency relative to the drive frame (MHz)"""
        return self.f01 - self.frame_f01

    def to_dict(self) -> Dict[str, Any]:
        return {
            "qubit": self.qubit,
            "frequency_MHz": self.frequency,
            "uncertainty_MHz": self.uncertainty,
            "f01_MHz": self.f01,
            "visibility": self.visibility,
            "delta_f_MHz": self.delta_f,
            "decay_ns": self.decay_ns,
            "two_sided": self.two_sided,
        }


def ramsey_model(
    t: np.ndarray, A: float, f: float, phi: float, tau: float, B: float
) -> np.ndarray:
    """B + A exp(-t/tau) cos(2 pi f t + phi); t in ns, f in MHz"""
    return B + A * np.exp(-t / tau) * np.cos(2 * np.pi * f * t * 1e-3 + phi)


def _fft_guess(delays: np.ndarray, values: np.ndarray) -> Tuple[float, float]:
    """(frequency in MHz, amplitude) of the strongest non-DC component"""
    n = values.size
    step_us = float(np.mean(np.diff(delays))) * 1e-3
    padded = 8 * n
    spectrum = np.fft.rfft(values - values.mean(), n=padded)
    freqs = np.fft.rfftfreq(padded, d=step_us)
    k = 1 + int(np.argmax(np.abs(spectrum[1:])))
    return float(freqs[k]), 2.0 * float(np.abs(spectrum[k])) / n


def fit_ramsey(
    delays: Sequence[float], populations: Sequence[float], shots: int
) -> Dict[str, float]:
    """Damped-sinusoid fit; flat traces are reported as zero frequency"""
    t = np.asarray(delays, dtype=float)
    p = np.asarray(populations, dtype=float)
    span = float(t.max() - t.min())
    clipped = np.clip(p, 1.0 / shots, 1.0 - 1.0 / shots)
    sigma = np.sqrt(clipped * (1.0 - clipped) / shots)

    f0, amp0 = _fft_guess(t, p)
    noise_floor = 5.0 * float(np.mean(sigma)) * np.sqrt(2.0 / t.size)
    if amp0 < noise_floor:
        return {
            "frequency": 0.0,
            "uncertainty": 1e3 / (2.0 * span),
            "visibility": float(np.clip(p.mean(), 0.0, 1.0)),
            "decay_ns": float("inf"),
        }

    f_nyquist = 0.5e3 / float(np.min(np.diff(t)))
    # linear fit at the FFT frequency seeds amplitude, phase and offset
    w = 2 * np.pi * f0 * t * 1e-3
    design = np.column_stack([np.ones_like(t), np.cos(w), np.sin(w)])
    (B0, c, s), *_ = np.linalg.lstsq(design, p, rcond=None)
    A0 = float(np.clip(np.hypot(c, s), 0.05, 1.0))
    phi0 = float(np.arctan2(-s, c))
    p0 = [A0, f0, phi0, span, float(np.clip(B0, 0.0, 1.0))]
    bounds = ([0.0, 0.0, -2 * np.pi, 1.0, 0.0], [1.0, f_nyquist, 2 * np.pi, 1e7, 1.0])
    try:
        params, cov = curve_fit(
            ramsey_model, t, p, p0=p0, sigma=sigma, absolute_sigma=True, bounds=bounds
        )
    except (RuntimeError, ValueError) as e:
        raise FitDiverged(f"Ramsey fit failed: {e}") from e
    A, f, _, tau, B = params
    uncertainty = float(np.sqrt(cov[1, 1]))
    if not np.isfinite(uncertainty) or uncertainty <= 0:
        raise FitDiverged("Ramsey fit returned no frequency uncertainty")
    return {
        "frequency": float(f),
        "uncertainty": uncertainty,
        "visibility": float(np.clip(B + abs(A), 0.0, 1.0)),
        "decay_ns": float(tau),
    }


def _sweep(
    dev: VirtualDevice,
    qubit: str,
    delta_f: float,
    delays: np.ndarray,
    shots: int,
    seed: Seed,
    neighbor: Optional[str],
    neighbor_excited: bool,
) -> Tuple[np.ndarray, Dict[str, float]]:
    qubits = (qubit,) if neighbor is None else (qubit, neighbor)
    seeds = spawn_seeds(seed, delays.size)
    populations = np.empty(delays.size)
    for i, dt in enumerate(delays):
        circuit = Circuit(qubits, measured=(qubit,))
        if neighbor is not None and neighbor_excited:
            circuit.x(neighbor)
        circuit.x90(qubit).idle(float(dt))
        circuit.rz(qubit, 2 * np.pi * float(dt) * 1e-3 * delta_f).x90(qubit)
        populations[i] = population(dev.run(circuit, shots, seeds[i]))

    fit = fit_ramsey(delays, populations, shots)
    if fit["visibility"] < RAMSEY_MIN_VISIBILITY:
        raise FitDiverged(
            f"{qubit}: Ramsey visibility {fit['visibility']:.3f} below "
            f"{RAMSEY_MIN_VISIBILITY}"
        )
    return populations, fit


def time_ramsey(
    dev: VirtualDevice,
    qubit: str,
    delta_f: float = RAMSEY_DETUNING_MHZ,
    delays: Optional[Sequence[float]] = None,
    shots: int = CALIBRATION_SHOTS,
    seed: Seed = None,
    neighbor: Optional[str] = None,
    neighbor_excited: bool = False,
    two_sided: bool = False,
) -> RamseyResult:
    """Estimate a qubit's f01 from Ramsey fringes, optionally with a neighbour in |1>

    A single sweep at +delta_f only sees |delta_f + offset|, so offsets at or
    beyond -delta_f fold back. `two_sided` adds a sweep at -delta_f and takes
    the offset from (f+^2 - f-^2) / (4 delta_f), which keeps the sign.
    """
    if delays is None:
        delays = np.linspace(0.0, RAMSEY_SPAN_NS, RAMSEY_POINTS)
    delays = np.asarray(delays, dtype=float)
    if delays.size < 5 or np.any(np.diff(delays) <= 0):
        raise DomainError("need at least five increasing Ramsey delays")
    span_us = float(delays[-1] - delays[0]) * 1e-3
    if delta_f > 0 and span_us * delta_f < 2.0:
        raise DomainError("delays must span at least two periods of the detuning")
    if two_sided and delta_f <= 0:
        raise DomainError("a two-sided Ramsey needs a positive detuning")

    frame = transmon_levels(dev.topology.qubit(qubit).spec, 0.0).f01
    populations, fit = _sweep(
        dev, qubit, delta_f, delays, shots, seed, neighbor, neighbor_excited
    )
    f_plus, sigma = fit["frequency"], fit["uncertainty"]
    if two_sided:
        _, mirrored = _sweep(
            dev,
            qubit,
            -delta_f,
            delays,
            shots,
            child_seed(seed, delays.size),
            neighbor,
            neighbor_excited,
        )
        f_minus = mirrored["frequency"]
        offset = (f_plus**2 - f_minus**2) / (4.0 * delta_f)
        sigma = float(
            np.hypot(f_plus * sigma, f_minus * mirrored["uncertainty"])
            / (2.0 * delta_f)
        )
    elif delta_f > 0 and f_plus >= 2.0 * delta_f:
        raise DomainError(
            f"{qubit}: fringe at {f_plus:.3f} MHz leaves the sign of the offset "
            f"open for delta_f={delta_f} MHz; use a two-sided Ramsey"
        )
    else:
        offset = f_plus - delta_f
    result = RamseyResult(
        qubit=qubit,
        frequency=f_plus,
        uncertainty=sigma,
        f01=frame + offset,
        visibility=fit["visibility"],
        delta_f=delta_f,
        frame_f01=frame,
        delays=delays,
        populations=populations,
        decay_ns=fit["decay_ns"],
        two_sided=two_sided,
    )
    logger.debug(
        "ramsey %s (neighbour %s=%d): f=%.5f +/- %.5f MHz",
        qubit,
        neighbor,
        int(neighbor_excited),
        result.frequency,
        result.uncertainty,
    )
    return result


def measure_chi_qq(
    dev: VirtualDevice,
    pair: str,
    shots: int = CALIBRATION_SHOTS,
    seed: Seed = None,
    delta_f: float = RAMSEY_DETUNING_MHZ,
    delays: Optional[Sequence[float]] = None,
    two_sided: bool = True,
) -> Tuple[DispersiveShift, DispersiveShift]:
    """chi_qq probed on each qubit of the pair with the other in |0> and |1>

    Both Ramsey detunings are used by default so a shift larger than delta_f
    keeps its sign.
    """
    record = dev.topology.pair(pair)
    q1, q2 = record.qubits
    seeds = spawn_seeds(seed, 4)
    shifts = []
    for k, (probe, other, direction) in enumerate(
        [(q1, q2, ProbeDirection.Q1_PROBED), (q2, q1, ProbeDirection.Q2_PROBED)]
    ):
        runs = [
            time_ramsey(
                dev,
                probe,
                delta_f,
                delays,
                shots,
                seeds[2 * k + excited],
                neighbor=other,
                neighbor_excited=bool(excited),
                two_sided=two_sided,
            )
            for excited in (0, 1)
        ]
        chi = runs[1].f01 - runs[0].f01
        sigma = float(np.hypot(runs[0].uncertainty, runs[1].uncertainty))
        shifts.append(DispersiveShift(chi, direction, uncertainty=sigma))
    logger.info(
        "chi_qq %s: %.4f +/- %.4f MHz / %.4f +/- %.4f MHz",
        record.label,
        shifts[0].chi_qq,
        shifts[0].uncertainty,
        shifts[1].chi_qq,
        shifts[1].uncertainty,
    )
    return shifts[0], shifts[1]
