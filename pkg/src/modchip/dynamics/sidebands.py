"""
Sideband decomposition of a flux-modulated transmon.

Modulating the tunable qubit at f_p makes its transition frequency
f(t) = f_mean + df(t) periodic. The accumulated phase exp(i*2pi*int df dt)
splits into sidebands at f_mean + k*f_p with complex weights eps_k; an
exchange interaction becomes resonant when one sideband meets the partner
transition.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from ..config import (
    DEFAULT_SIDEBAND_ORDER,
    SIDEBAND_SAMPLES,
    SIDEBAND_WEIGHT_TOLERANCE,
)
from ..device.transmon import TransmonSpec, ladder_elements, level_energies
from ..errors import DomainError, SidebandConvergenceError
from .pulses import TWO_PI, FluxPulse
from .system import PairSystem

logger = logging.getLogger(__name__)

DEFAULT_K_RANGE = range(-32, 33)


class GateType(Enum):
    ISWAP = "iSWAP"
    CZ02 = "CZ02"
    CZ20 = "CZ20"


@dataclass
class SidebandResult:
    """Sideband weights eps_k and the period-averaged frequency (MHz)"""

    weights: Dict[int, complex]
    f_mean: float
    f_p: float
    missed_weight: float = 0.0
    metadata: Dict[str, float] = field(default_factory=dict)

    def magnitude(self, k: int) -> float:
        return abs(self.weights.get(k, 0.0))

    def total_weight(self) -> float:
        return float(sum(abs(w) ** 2 for w in self.weights.values()))


@dataclass
class EffectiveCoupling:
    """Resonant component of a modulated exchange coupling"""

    gate: GateType
    g_eff: float  # MHz
    order: int  # sideband index k that cancels the mean detuning
    f_mean: float  # mean transition detuning in MHz
    f_p: float

    def transfer_time(self) -> float:
        """Duration (ns) of a full iSWAP transfer or a 2pi CZ return"""
        if self.g_eff <= 0:
            raise DomainError("effective coupling vanishes; no transfer time")
        quarter = 1.0 / (4.0 * self.g_eff)
        us = quarter if self.gate is GateType.ISWAP else 2.0 * quarter
        return 1e3 * us


def fourier_sidebands(
    freq_samples: np.ndarray,
    f_p: float,
    k_range: Iterable[int] = DEFAULT_K_RANGE,
    amplitude: Optional[np.ndarray] = None,
) -> SidebandResult:
    """Decompose amplitude(t)*exp(i*theta(t)) sampled uniformly over one period.

    theta is the integral of the mean-removed frequency; it is obtained
    spectrally so the decomposition is exact for band-limited excursions.
    """
    f = np.asarray(freq_samples, dtype=float)
    if f.ndim != 1 or f.size < 4:
        raise DomainError("need at least four frequency samples over one period")
    if f_p <= 0:
        raise DomainError("modulation frequency must be positive")
    n = f.size
    amp = np.ones(n) if amplitude is None else np.asarray(amplitude, dtype=float)
    if amp.shape != f.shape:
        raise DomainError("amplitude samples must match frequency samples")

    f_mean = float(f.mean())
    spectrum = np.fft.fft(f - f_mean)
    harmonics = np.fft.fftfreq(n, d=1.0 / n)
    theta_spec = np.zeros(n, dtype=complex)
    nonzero = harmonics != 0
    theta_spec[nonzero] = spectrum[nonzero] / (1j * harmonics[nonzero] * f_p)
    theta = np.real(np.fft.ifft(theta_spec))

    coefficients = np.fft.fft(amp * np.exp(1j * theta)) / n
    total = float(np.sum(np.abs(coefficients) ** 2))
    ks = sorted(set(int(k) for k in k_range))
    weights = {k: complex(coefficients[k % n]) for k in ks if abs(k) < n // 2}
    kept = sum(abs(w) ** 2 for w in weights.values())
    missed = (total - kept) / total if total > 0 else 0.0
    if missed > SIDEBAND_WEIGHT_TOLERANCE:
        raise SidebandConvergenceError(
            f"k in [{ks[0]}, {ks[-1]}] misses {missed:.2e} of the sideband weight"
        )
    return SidebandResult(weights=weights, f_mean=f_mean, f_p=f_p, missed_weight=missed)


def _period_flux(pulse: FluxPulse) -> np.ndarray:
    x = TWO_PI * np.arange(SIDEBAND_SAMPLES) / SIDEBAND_SAMPLES
    return pulse.phi_dc + pulse.phi_ac * np.cos(x + pulse.phase)


def sideband_weights(
    spec: TransmonSpec,
    pulse: FluxPulse,
    k_range: Iterable[int] = DEFAULT_K_RANGE,
) -> SidebandResult:
    """Sidebands of the 0-1 transition of a modulated tunable transmon"""
    if not spec.tunable:
        raise DomainError(f"{spec.label or 'qubit'} is not flux tunable")
    if not pulse.modulated:
        E = level_energies(spec, pulse.phi_dc, 2)
        f01 = 1e3 * float(E[1] - E[0])
        weights = {int(k): (1.0 + 0j if k == 0 else 0j) for k in k_range}
        return SidebandResult(weights=weights, f_mean=f01, f_p=pulse.f_p)

    E = level_energies(spec, _period_flux(pulse), 2)
    result = fourier_sidebands(1e3 * (E[:, 1] - E[:, 0]), pulse.f_p, k_range)
    if pulse.phi_dc == 0:
        # frequency has period 1/(2 f_p) at the sweet spot; odd weights are
        # round-off there and are pinned to zero
        for k in result.weights:
            if k % 2:
                result.weights[k] = 0j
    logger.debug(
        "%s sidebands: f_mean=%.3f MHz |eps_2|=%.4f",
        spec.label,
        result.f_mean,
        result.magnitude(2),
    )
    return result


def _transition_samples(
    pair: PairSystem, pulse: FluxPulse, gate: GateType
) -> Tuple[np.ndarray, np.ndarray]:
    """Detuning f_ab(t) (MHz) and coupling amplitude (MHz) over one period"""
    E_F = level_energies(pair.fixed, 0.0, 3)
    lad_F = ladder_elements(pair.fixed, 0.0, 3)
    phi = _period_flux(pulse) if pulse.modulated else np.full(1, pulse.phi_dc)
    E_T = level_energies(pair.tunable, phi, 3)
    lad_T = ladder_elements(pair.tunable, phi, 3)
    f01_F = 1e3 * (E_F[1] - E_F[0])
    f12_F = 1e3 * (E_F[2] - E_F[1])
    f01_T = 1e3 * (E_T[:, 1] - E_T[:, 0])
    f12_T = 1e3 * (E_T[:, 2] - E_T[:, 1])
    if gate is GateType.ISWAP:
        return f01_T - f01_F, pair.g * lad_F[0] * lad_T[:, 0]
    if gate is GateType.CZ02:
        return f12_T - f01_F, pair.g * lad_F[0] * lad_T[:, 1]
    return f12_F - f01_T, pair.g * lad_F[1] * lad_T[:, 0]


def resonance_frequency(
    pair: PairSystem,
    pulse: FluxPulse,
    gate: GateType,
    order: int = DEFAULT_SIDEBAND_ORDER,
) -> float:
    """Modulation frequency (MHz) whose `order`-th sideband bridges the transition"""
    if order < 1:
        raise DomainError("sideband order must be positive")
    detuning, _ = _transition_samples(pair, pulse, gate)
    return abs(float(detuning.mean())) / order


def effective_coupling(
    pair: PairSystem,
    pulse: FluxPulse,
    gate: GateType,
    k_range: Iterable[int] = DEFAULT_K_RANGE,
) -> EffectiveCoupling:
    """Resonant Fourier component of g(t)*exp(i*theta_ab(t)) at the pulse frequency"""
    detuning, amplitude = _transition_samples(pair, pulse, gate)
    f_mean = float(detuning.mean())
    if not pulse.modulated:
        g_eff = float(amplitude.mean()) if abs(f_mean) < 1e-6 else 0.0
        return EffectiveCoupling(gate, g_eff, 0, f_mean, pulse.f_p)
    result = fourier_sidebands(detuning, pulse.f_p, k_range, amplitude)
    k_star = -int(round(f_mean / pulse.f_p))
    g_eff = result.magnitude(k_star)
    logger.debug(
        "%s %s: f_p=%.2f MHz k=%d g_eff=%.4f MHz",
        pair.label,
        gate.value,
        pulse.f_p,
        k_star,
        g_eff,
    )
    return EffectiveCoupling(gate, g_eff, k_star, f_mean, pulse.f_p)
