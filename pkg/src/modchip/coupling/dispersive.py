"""
Static ZZ (dispersive) shift between two coupled transmons and its inversion
to the bare coupling rate.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

from ..config import DEGENERACY_FACTOR, DISPERSIVE_RATIO_MIN
from ..device.transmon import TransmonAtFlux
from ..errors import DegenerateDenominator, SignMismatch

logger = logging.getLogger(__name__)


class ProbeDirection(Enum):
    Q1_PROBED = "q1_probed"
    Q2_PROBED = "q2_probed"


@dataclass(frozen=True)
class DispersiveShift:
    """Measured frequency shift of one qubit when its neighbour is excited (MHz)"""

    chi_qq: float
    direction: ProbeDirection
    uncertainty: float = 0.0


@dataclass(frozen=True)
class CouplingEstimate:
    g_MHz: float
    uncertainty_MHz: float


def dispersive_bracket(
    t1: TransmonAtFlux,
    t2: TransmonAtFlux,
    g: float = 0.0,
    degeneracy_factor: float = DEGENERACY_FACTOR,
) -> float:
    """Spectral factor multiplying 2g^2 in the second-order ZZ shift (1/MHz)"""
    den_a = t1.f01 - t2.f12
    den_b = t1.f12 - t2.f01
    limit = degeneracy_factor * g
    if g > 0 and (abs(den_a) < limit or abs(den_b) < limit):
        raise DegenerateDenominator(
            f"detunings {den_a:.1f}/{den_b:.1f} MHz within {limit:.1f} MHz of resonance"
        )
    if den_a == 0 or den_b == 0:
        raise DegenerateDenominator("exact resonance between 01 and 12 transitions")
    return (t1.mu01**2 * t2.mu12**2) / den_a - (t1.mu12**2 * t2.mu01**2) / den_b


def chi_qq_model(
    g: float,
    t1: TransmonAtFlux,
    t2: TransmonAtFlux,
    dispersive_ratio: float = DISPERSIVE_RATIO_MIN,
    degeneracy_factor: float = DEGENERACY_FACTOR,
) -> float:
    """Second-order ZZ shift chi_qq (MHz) for bare coupling g (MHz)"""
    if g == 0:
        return 0.0
    if abs(t1.f01 - t2.f01) < dispersive_ratio * g:
        logger.warning(
            "qubits detuned by %.1f MHz are not dispersive for g=%.2f MHz",
            abs(t1.f01 - t2.f01),
            g,
        )
    return 2.0 * g**2 * dispersive_bracket(t1, t2, g, degeneracy_factor)


def g_from_chi(
    chi: DispersiveShift, t1: TransmonAtFlux, t2: TransmonAtFlux
) -> CouplingEstimate:
    """Invert the ZZ model to the bare coupling, propagating the chi uncertainty"""
    bracket = dispersive_bracket(t1, t2)
    ratio = chi.chi_qq / bracket
    if ratio < 0:
        raise SignMismatch(
            f"chi={chi.chi_qq:.4f} MHz has the opposite sign to the spectral factor"
        )
    g = math.sqrt(ratio / 2.0)
    if chi.chi_qq == 0:
        sigma = math.sqrt(chi.uncertainty / (2.0 * abs(bracket)))
    else:
        sigma = g * chi.uncertainty / (2.0 * abs(chi.chi_qq))
    return CouplingEstimate(g_MHz=g, uncertainty_MHz=sigma)
