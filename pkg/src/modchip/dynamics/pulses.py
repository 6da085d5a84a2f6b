"""
Parametric flux pulses applied to the tunable qubit of a pair.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Union

import numpy as np

from ..config import DEFAULT_RAMP_NS
from ..errors import DomainError

TWO_PI = 2.0 * np.pi


class Envelope(Enum):
    RECTANGULAR = "rectangular"
    COSINE_RAMPED = "cosine_ramped"


@dataclass(frozen=True)
class FluxPulse:
    """phi(t) = phi_dc + envelope(t) * phi_ac * cos(2 pi f_p t + phase).

    Flux in units of the flux quantum, f_p in MHz, times in ns.
    """

    phi_dc: float
    phi_ac: float
    f_p: float
    duration: float
    phase: float = 0.0
    envelope: Envelope = Envelope.COSINE_RAMPED
    rise_ns: float = DEFAULT_RAMP_NS

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise DomainError("pulse duration must be positive")
        if self.phi_ac < 0 or self.f_p < 0:
            raise DomainError("modulation amplitude and frequency must be non-negative")
        if abs(self.phi_dc) + self.phi_ac > 0.5 + 1e-12:
            raise DomainError("|phi_dc| + phi_ac must not exceed half a flux quantum")
        if self.envelope is Envelope.COSINE_RAMPED and self.rise_ns < 0:
            raise DomainError("rise time must be non-negative")

    @property
    def modulated(self) -> bool:
        return self.phi_ac > 0 and self.f_p > 0

    def with_duration(self, duration: float) -> "FluxPulse":
        return replace(self, duration=duration)

    def envelope_at(self, t: Union[float, np.ndarray]) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.envelope is Envelope.RECTANGULAR or self.rise_ns == 0:
            return np.ones_like(t)
        rise = min(self.rise_ns, self.duration / 2.0)
        up = np.clip(t / rise, 0.0, 1.0)
        down = np.clip((self.duration - t) / rise, 0.0, 1.0)
        return 0.5 * (1.0 - np.cos(np.pi * np.minimum(up, down)))

    def flux(self, t: Union[float, np.ndarray]) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if not self.modulated:
            return np.full_like(t, self.phi_dc)
        carrier = np.cos(TWO_PI * self.f_p * 1e-3 * t + self.phase)
        return self.phi_dc + self.envelope_at(t) * self.phi_ac * carrier
