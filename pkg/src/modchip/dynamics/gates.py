"""
Parametric two-qubit gates: pulse design from sideband theory and
full simulation against the ideal iSWAP or CZ.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import optimize

from ..config import (
    DEFAULT_PHI_AC,
    DEFAULT_RAMP_NS,
    DEFAULT_SIDEBAND_ORDER,
    PROPAGATOR_TOLERANCE,
)
from ..errors import ModchipError, NoSolution
from .fidelity import (
    Result,
    apply_z_correction,
    average_gate_fidelity,
    conditional_phase,
    ideal_gate,
    leakage,
    optimize_z_phases,
)
from .lindblad import evolve_lindblad
from .propagate import evolve_unitary
from .pulses import Envelope, FluxPulse
from .sidebands import GateType, effective_coupling, resonance_frequency
from .system import NoiseSpec, PairSystem

logger = logging.getLogger(__name__)


@dataclass
class GateResult:
    """Outcome of one simulated gate"""

    gate: GateType
    pulse: FluxPulse
    propagator: Result
    unitary: Optional[np.ndarray]
    leakage: float
    avg_fidelity: float
    conditional_phase: float
    z_phases: Tuple[float, float] = (0.0, 0.0)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def error(self) -> float:
        return 1.0 - self.avg_fidelity

    def summary(self) -> Dict[str, Any]:
        return {
            "gate": self.gate.value,
            "f_p_MHz": self.pulse.f_p,
            "t_gate_ns": self.pulse.duration,
            "phi_dc_phi0": self.pulse.phi_dc,
            "phi_ac_phi0": self.pulse.phi_ac,
            "avg_fidelity": self.avg_fidelity,
            "leakage": self.leakage,
            "conditional_phase_rad": self.conditional_phase,
            **self.metadata,
        }


def simulate_gate(
    pair: PairSystem,
    pulse: FluxPulse,
    gate: GateType,
    noise: Optional[NoiseSpec] = None,
    optimize_phases: bool = True,
    tol: float = PROPAGATOR_TOLERANCE,
) -> GateResult:
    """Evolve the pulse (unitarily, or with decoherence when noise is given)"""
    if noise is None:
        result: Result = evolve_unitary(pair, pulse, tol=tol)
    else:
        result = evolve_lindblad(pair, pulse, noise, tol=tol)
    target = ideal_gate(gate)
    a, b = optimize_z_phases(result, target) if optimize_phases else (0.0, 0.0)
    corrected = apply_z_correction(result, a, b)
    unitary = None if noise is not None else np.asarray(corrected)
    out = GateResult(
        gate=gate,
        pulse=pulse,
        propagator=result,
        unitary=unitary,
        leakage=leakage(result),
        avg_fidelity=average_gate_fidelity(corrected, target),
        conditional_phase=conditional_phase(result),
        z_phases=(a, b),
    )
    logger.info(
        "%s %s: F_avg=%.5f leakage=%.2e",
        pair.label,
        gate.value,
        out.avg_fidelity,
        out.leakage,
    )
    return out


def coherent_error(
    pair: PairSystem,
    calibrated_pulse: FluxPulse,
    gate: GateType,
    tol: float = PROPAGATOR_TOLERANCE,
) -> float:
    """Gate error without loss or dephasing, after optimal single-qubit Z phases"""
    return simulate_gate(pair, calibrated_pulse, gate, tol=tol).error


def _probe(phi_dc: float, phi_ac: float) -> FluxPulse:
    return FluxPulse(phi_dc, phi_ac, 1.0, 1.0, envelope=Envelope.RECTANGULAR)


def predicted_gate_time(
    pair: PairSystem,
    gate: GateType,
    phi_ac: float,
    phi_dc: float = 0.0,
    order: int = DEFAULT_SIDEBAND_ORDER,
) -> Tuple[float, float]:
    """(f_p in MHz, flat-top gate time in ns) predicted from the sideband model"""
    probe = _probe(phi_dc, phi_ac)
    f_p = resonance_frequency(pair, probe, gate, order)
    coupling = effective_coupling(pair, replace(probe, f_p=f_p), gate)
    return f_p, coupling.transfer_time()


def design_gate_pulse(
    pair: PairSystem,
    gate: GateType,
    phi_ac: float = DEFAULT_PHI_AC,
    phi_dc: float = 0.0,
    envelope: Envelope = Envelope.COSINE_RAMPED,
    rise_ns: float = DEFAULT_RAMP_NS,
    order: int = DEFAULT_SIDEBAND_ORDER,
) -> FluxPulse:
    """Model-designed gate pulse; a cosine ramp pair adds one rise time"""
    f_p, t_flat = predicted_gate_time(pair, gate, phi_ac, phi_dc, order)
    duration = t_flat + (rise_ns if envelope is Envelope.COSINE_RAMPED else 0.0)
    return FluxPulse(
        phi_dc=phi_dc,
        phi_ac=phi_ac,
        f_p=f_p,
        duration=duration,
        envelope=envelope,
        rise_ns=rise_ns,
    )


def phi_ac_for_gate_time(
    pair: PairSystem,
    gate: GateType,
    t_gate: float,
    phi_dc: float = 0.0,
    order: int = DEFAULT_SIDEBAND_ORDER,
) -> float:
    """Smallest modulation amplitude whose predicted gate time equals t_gate"""
    hi = 0.5 - abs(phi_dc) - 1e-3
    grid = np.linspace(0.01, hi, 48)

    def residual(phi_ac: float) -> float:
        return predicted_gate_time(pair, gate, phi_ac, phi_dc, order)[1] - t_gate

    values = []
    for phi_ac in grid:
        try:
            values.append(residual(phi_ac))
        except ModchipError as e:  # vanishing coupling at this amplitude
            logger.debug("phi_ac=%.3f skipped: %s", phi_ac, e)
            values.append(np.inf)
    for i in range(len(grid) - 1):
        if np.isfinite(values[i]) and np.isfinite(values[i + 1]):
            if values[i] > 0 >= values[i + 1]:
                root = optimize.brentq(residual, grid[i], grid[i + 1], xtol=1e-10)
                return float(root)
    raise NoSolution(f"no modulation amplitude reaches a {t_gate:.1f} ns {gate.value}")
