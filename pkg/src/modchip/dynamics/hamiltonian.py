"""
Time-dependent Hamiltonian of a coupled fixed/tunable transmon pair.

Matrices are in angular units (rad/ns). In the doubly rotating frame every
bare level rotates at its parked energy, with the tunable qubit's levels
averaged over one modulation period, so an unmodulated uncoupled pair has
H = 0.
"""

from typing import Optional, Tuple

import numpy as np

from ..config import SIDEBAND_SAMPLES
from ..device.transmon import ladder_elements, level_energies
from .pulses import TWO_PI, FluxPulse
from .system import Frame, PairSystem

MHZ = TWO_PI * 1e-3  # MHz -> rad/ns
GHZ = TWO_PI  # GHz -> rad/ns


def period_average_levels(pair: PairSystem, pulse: Optional[FluxPulse]) -> np.ndarray:
    """Tunable level energies (GHz, ground removed) averaged over one period"""
    if pulse is None or not pulse.modulated:
        phi = np.array([0.0 if pulse is None else pulse.phi_dc])
    else:
        t = np.arange(SIDEBAND_SAMPLES) / (SIDEBAND_SAMPLES * pulse.f_p * 1e-3)
        phase = TWO_PI * pulse.f_p * 1e-3 * t + pulse.phase
        phi = pulse.phi_dc + pulse.phi_ac * np.cos(phase)
    E = level_energies(pair.tunable, phi, pair.levels)
    E = E - E[:, :1]
    return E.mean(axis=0)


class PairHamiltonian:
    """Evaluates H(t) for a pair under a flux pulse, vectorized over time"""

    def __init__(self, pair: PairSystem, pulse: Optional[FluxPulse] = None):
        self.pair = pair
        self.pulse = pulse
        L = pair.levels
        E_F = level_energies(pair.fixed, 0.0, L)
        self.E_F = E_F - E_F[0]
        self.ladder_F = ladder_elements(pair.fixed, 0.0, L)
        if pair.frame is Frame.LAB:
            self.frame_F = np.zeros(L)
            self.frame_T = np.zeros(L)
        else:
            self.frame_F = self.E_F.copy()
            self.frame_T = period_average_levels(pair, pulse)
        self._frame = (self.frame_F[:, None] + self.frame_T[None, :]).ravel()
        self._couplings = self._coupling_index()

    def _coupling_index(self) -> list:
        L = self.pair.levels
        terms = []
        for f in range(L - 1):
            for t in range(L - 1):
                # exchange |f+1, t> <-> |f, t+1>
                terms.append(((f + 1) * L + t, f * L + t + 1, f, t))
                if self.pair.counter_rotating:
                    terms.append(((f + 1) * L + t + 1, f * L + t, f, t))
        return terms

    def flux(self, t: np.ndarray) -> np.ndarray:
        if self.pulse is None:
            return np.zeros_like(t)
        return self.pulse.flux(t)

    def tunable_terms(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Tunable level energies (GHz, ground removed) and ladders at times t"""
        phi = self.flux(t)
        E_T = level_energies(self.pair.tunable, phi, self.pair.levels)
        E_T = E_T - E_T[..., :1]
        ladder_T = ladder_elements(self.pair.tunable, phi, self.pair.levels)
        return E_T, ladder_T

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        L = self.pair.levels
        E_T, ladder_T = self.tunable_terms(t)
        H = np.zeros((t.size, L * L, L * L), dtype=complex)
        diag = (self.E_F[None, :, None] + E_T[:, None, :]).reshape(t.size, L * L)
        idx = np.arange(L * L)
        H[:, idx, idx] = GHZ * (diag - self._frame[None, :])
        g = MHZ * self.pair.g
        for a, b, f, k in self._couplings:
            amp = g * self.ladder_F[f] * ladder_T[:, k]
            phase = np.exp(1j * GHZ * (self._frame[a] - self._frame[b]) * t)
            H[:, a, b] = amp * phase
            H[:, b, a] = np.conj(H[:, a, b])
        return H


def static_hamiltonian(pair: PairSystem, phi: float = 0.0) -> np.ndarray:
    """Lab-frame Hamiltonian (GHz) at a fixed tunable flux"""
    L = pair.levels
    E_F = level_energies(pair.fixed, 0.0, L)
    E_T = level_energies(pair.tunable, phi, L)
    lad_F = ladder_elements(pair.fixed, 0.0, L)
    lad_T = ladder_elements(pair.tunable, phi, L)
    H = np.diag((E_F[:, None] + E_T[None, :]).ravel()).astype(complex)
    g = pair.g * 1e-3
    for f in range(L - 1):
        for t in range(L - 1):
            a, b = (f + 1) * L + t, f * L + t + 1
            H[a, b] = H[b, a] = g * lad_F[f] * lad_T[t]
            if pair.counter_rotating:
                c, d = (f + 1) * L + t + 1, f * L + t
                H[c, d] = H[d, c] = g * lad_F[f] * lad_T[t]
    return H


def dressed_energies(pair: PairSystem, phi: float = 0.0) -> dict:
    """Dressed energies (MHz) of the computational states, matched by maximum overlap"""
    energies, vectors = np.linalg.eigh(static_hamiltonian(pair, phi))
    out = {}
    for label in ("00", "01", "10", "11"):
        column = int(np.argmax(np.abs(vectors[pair.index(label), :]) ** 2))
        out[label] = 1e3 * float(energies[column])
    return out


def static_zz(pair: PairSystem, phi: float = 0.0) -> float:
    """Exact ZZ shift E11 - E10 - E01 + E00 in MHz"""
    E = dressed_energies(pair, phi)
    return E["11"] - E["10"] - E["01"] + E["00"]
