"""
Static physics of a single transmon.

Energies are in GHz (E/h), frequencies in MHz and flux in units of the
flux quantum. Level energies come from the large-q asymptotic expansion of
the Mathieu characteristic values; charge matrix elements come from exact
diagonalization in the charge basis, which also serves as the spectrum oracle.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy import constants, optimize

from ..config import CHARGE_CUTOFF, DEFAULT_GAP_UEV, TRANSMON_REGIME_MIN_RATIO
from ..errors import DomainError, NonTransmonRegime, NoSolution

logger = logging.getLogger(__name__)

FluxLike = Union[float, np.ndarray]

# Flux grid used to tabulate ladder matrix elements of tunable qubits
_LADDER_GRID_POINTS = 513


class QubitKind(Enum):
    FIXED = "fixed"
    TUNABLE = "tunable"


class DesignClass(Enum):
    I = "I"  # noqa: E741
    II = "II"
    III = "III"
    IV = "IV"


@dataclass(frozen=True)
class TransmonSpec:
    """Design parameters of one transmon"""

    kind: QubitKind
    E_J_sum: float
    E_C: float
    d_asym: float = 0.0
    label: str = ""
    design_class: Optional[DesignClass] = None

    def __post_init__(self) -> None:
        if self.E_C <= 0 or self.E_J_sum <= 0:
            raise DomainError(f"{self.label or 'transmon'}: energies must be positive")
        if not 0.0 <= self.d_asym < 1.0:
            raise DomainError(f"{self.label or 'transmon'}: d_asym must lie in [0, 1)")
        if self.E_J_sum / self.E_C <= TRANSMON_REGIME_MIN_RATIO:
            raise NonTransmonRegime(
                f"{self.label or 'transmon'}: E_J/E_C = {self.E_J_sum / self.E_C:.1f} "
                f"is below {TRANSMON_REGIME_MIN_RATIO}"
            )

    @property
    def tunable(self) -> bool:
        return self.kind is QubitKind.TUNABLE


@dataclass(frozen=True)
class TransmonAtFlux:
    """Spectrum and charge matrix elements of a transmon at one flux point"""

    phi: float
    E_J_eff: float
    f01: float
    f12: float
    eta: float
    lambda_01: float
    Lambda_12: float
    mu01: float
    mu12: float


def ej_eff(spec: TransmonSpec, phi: FluxLike) -> FluxLike:
    """Effective Josephson energy of the asymmetric DC SQUID"""
    if not spec.tunable:
        if np.ndim(phi) == 0:
            return spec.E_J_sum
        return np.full(np.shape(phi), spec.E_J_sum)
    x = np.pi * np.asarray(phi, dtype=float)
    value = spec.E_J_sum * np.sqrt(np.cos(x) ** 2 + spec.d_asym**2 * np.sin(x) ** 2)
    return float(value) if np.ndim(value) == 0 else value


def mathieu_energies(E_J: FluxLike, E_C: float, n_levels: int) -> np.ndarray:
    """Absolute level energies (GHz) for the lowest n_levels, shape (..., n_levels)"""
    h = np.sqrt(np.asarray(E_J, dtype=float) / (2.0 * E_C))[..., None]
    s = 2.0 * np.arange(n_levels) + 1.0
    a = (
        -2.0 * h**2
        + 2.0 * s * h
        - (s**2 + 1.0) / 8.0
        - (s**3 + 3.0 * s) / (2**7 * h)
        - (5.0 * s**4 + 34.0 * s**2 + 9.0) / (2**12 * h**2)
        - (33.0 * s**5 + 410.0 * s**3 + 405.0 * s) / (2**17 * h**3)
        - (63.0 * s**6 + 1260.0 * s**4 + 2943.0 * s**2 + 486.0) / (2**20 * h**4)
        - (527.0 * s**7 + 15617.0 * s**5 + 69001.0 * s**3 + 41607.0 * s)
        / (2**25 * h**5)
    )
    return E_C * a


def _check_regime(E_J: FluxLike, E_C: float, label: str) -> None:
    ratio = np.min(np.asarray(E_J, dtype=float)) / E_C
    if ratio < TRANSMON_REGIME_MIN_RATIO:
        raise NonTransmonRegime(
            f"{label or 'transmon'}: E_J_eff/E_C = {ratio:.2f} below "
            f"{TRANSMON_REGIME_MIN_RATIO}"
        )


def level_energies(spec: TransmonSpec, phi: FluxLike, n_levels: int = 3) -> np.ndarray:
    """Level energies in GHz at each flux value, shape phi.shape + (n_levels,)"""
    E_J = ej_eff(spec, phi)
    _check_regime(E_J, spec.E_C, spec.label)
    return mathieu_energies(E_J, spec.E_C, n_levels)


@lru_cache(maxsize=4096)
def _charge_basis(E_J: float, E_C: float, cutoff: int) -> Tuple[np.ndarray, np.ndarray]:
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    off = np.full(2 * cutoff, -E_J / 2.0)
    hamiltonian = np.diag(4.0 * E_C * n**2) + np.diag(off, 1) + np.diag(off, -1)
    energies, vectors = np.linalg.eigh(hamiltonian)
    charge = vectors.T @ (n[:, None] * vectors)
    energies.setflags(write=False)
    charge.setflags(write=False)
    return energies, charge


def charge_basis_levels(
    E_J: float, E_C: float, cutoff: int = CHARGE_CUTOFF
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact Cooper-pair-box spectrum at zero offset charge.

    Returns (energies, charge operator in the eigenbasis); both arrays are
    read-only and shared through a cache.
    """
    return _charge_basis(float(E_J), float(E_C), int(cutoff))


def _normalized_elements(E_J: float, E_C: float) -> Tuple[float, float, float]:
    _, charge = charge_basis_levels(E_J, E_C)
    scale = (E_J / (8.0 * E_C)) ** 0.25
    n01 = abs(charge[0, 1])
    n12 = abs(charge[1, 2])
    return n01, n01 / scale, n12 / (math.sqrt(2.0) * scale)


def charge_matrix_elements(
    spec: TransmonSpec, phi: float
) -> Tuple[float, float, float, float]:
    """(lambda_01, Lambda_12, mu01, mu12) at the given flux"""
    E_J = float(ej_eff(spec, phi))
    E_J0 = float(ej_eff(spec, 0.0))
    _check_regime(E_J, spec.E_C, spec.label)
    _, lam, Lam = _normalized_elements(E_J, spec.E_C)
    _, lam0, _ = _normalized_elements(E_J0, spec.E_C)
    ratio = (E_J / E_J0) ** 0.25
    return lam, Lam, ratio * lam / lam0, ratio * Lam / lam0


def transmon_levels(spec: TransmonSpec, phi: float) -> TransmonAtFlux:
    """Spectrum of one transmon at a static flux point"""
    E_J = float(ej_eff(spec, phi))
    _check_regime(E_J, spec.E_C, spec.label)
    E = mathieu_energies(E_J, spec.E_C, 3)
    f01 = 1e3 * float(E[1] - E[0])
    f12 = 1e3 * float(E[2] - E[1])
    lam, Lam, mu01, mu12 = charge_matrix_elements(spec, phi)
    return TransmonAtFlux(
        phi=float(phi),
        E_J_eff=E_J,
        f01=f01,
        f12=f12,
        eta=f12 - f01,
        lambda_01=lam,
        Lambda_12=Lam,
        mu01=mu01,
        mu12=mu12,
    )


@lru_cache(maxsize=256)
def _ladder_table(
    E_J_sum: float, d_asym: float, E_C: float, n_levels: int
) -> Tuple[np.ndarray, np.ndarray]:
    grid = np.linspace(0.0, 0.5, _LADDER_GRID_POINTS)
    x = np.pi * grid
    E_J = E_J_sum * np.sqrt(np.cos(x) ** 2 + d_asym**2 * np.sin(x) ** 2)
    n = np.arange(-CHARGE_CUTOFF, CHARGE_CUTOFF + 1, dtype=float)
    idx = np.arange(n.size)
    hamiltonians = np.zeros((grid.size, n.size, n.size))
    hamiltonians[:, idx, idx] = 4.0 * E_C * n**2
    hamiltonians[:, idx[:-1], idx[1:]] = -E_J[:, None] / 2.0
    hamiltonians[:, idx[1:], idx[:-1]] = -E_J[:, None] / 2.0
    _, vectors = np.linalg.eigh(hamiltonians)
    low = vectors[:, :, :n_levels]
    charge = np.einsum("gai,a,gaj->gij", low, n, low)
    n01_0 = abs(charge_basis_levels(E_J_sum, E_C)[1][0, 1])
    table = np.abs(np.diagonal(charge, offset=1, axis1=1, axis2=2)) / n01_0
    grid.setflags(write=False)
    table.setflags(write=False)
    return grid, table


def ladder_elements(spec: TransmonSpec, phi: FluxLike, n_levels: int = 3) -> np.ndarray:
    """Normalized charge ladder elements |<k|n|k+1>(phi)| / |<0|n|1>(0)|.

    Shape phi.shape + (n_levels - 1,). Element 0 is mu01 and element 1 is
    sqrt(2)*mu12.
    """
    phi_arr = np.asarray(phi, dtype=float)
    if not spec.tunable:
        charge = charge_basis_levels(spec.E_J_sum, spec.E_C)[1]
        row = np.array([abs(charge[k, k + 1]) for k in range(n_levels - 1)])
        row = row / abs(charge[0, 1])
        return np.broadcast_to(row, phi_arr.shape + (n_levels - 1,)).copy()
    grid, table = _ladder_table(spec.E_J_sum, spec.d_asym, spec.E_C, n_levels)
    folded = np.abs(phi_arr - np.round(phi_arr))
    return np.stack(
        [np.interp(folded, grid, table[:, k]) for k in range(n_levels - 1)], axis=-1
    )


def ej_from_conductance(R_n: float, gap: float = DEFAULT_GAP_UEV) -> float:
    """Josephson energy (GHz) from normal-state resistance (ohm) and gap (ueV)"""
    if R_n <= 0 or gap <= 0:
        raise DomainError("resistance and superconducting gap must be positive")
    R_K = constants.h / constants.e**2
    gap_joule = gap * 1e-6 * constants.e
    return gap_joule / 8.0 * (R_K / R_n) / constants.h / 1e9


def predict_f01_from_conductance(
    R_n: float, E_C: float, d_asym: float = 0.0, gap: float = DEFAULT_GAP_UEV
) -> float:
    """Predicted maximum f01 (MHz) of a junction pair measured at room temperature"""
    E_J = ej_from_conductance(R_n, gap)
    kind = QubitKind.TUNABLE if d_asym > 0 else QubitKind.FIXED
    spec = TransmonSpec(kind=kind, E_J_sum=E_J, E_C=E_C, d_asym=d_asym)
    return transmon_levels(spec, 0.0).f01


def prediction_error(predicted: float, measured: float) -> float:
    """Relative deviation of a frequency prediction"""
    if measured == 0:
        raise DomainError("measured frequency must be non-zero")
    return abs(predicted - measured) / abs(measured)


def _f01(E_J: float, E_C: float) -> float:
    E = mathieu_energies(E_J, E_C, 2)
    return 1e3 * float(E[1] - E[0])


def _eta(E_J: float, E_C: float) -> float:
    E = mathieu_energies(E_J, E_C, 3)
    return 1e3 * float(E[2] - 2.0 * E[1] + E[0])


def _solve_ej(f01: float, E_C: float) -> float:
    lo = TRANSMON_REGIME_MIN_RATIO * E_C * (1.0 + 1e-9)
    hi = 1e4 * E_C
    if _f01(lo, E_C) > f01:
        raise NoSolution(
            f"f01={f01:.1f} MHz needs E_J/E_C below the transmon regime "
            f"at E_C={E_C:.4f} GHz"
        )
    if _f01(hi, E_C) < f01:
        raise NoSolution(f"f01={f01:.1f} MHz is out of reach at E_C={E_C:.4f} GHz")
    return float(optimize.brentq(lambda ej: _f01(ej, E_C) - f01, lo, hi, xtol=1e-12))


def spec_from_targets(
    f01_max: float,
    f01_min: float,
    eta: float,
    kind: Optional[QubitKind] = None,
    label: str = "",
    design_class: Optional[DesignClass] = None,
) -> TransmonSpec:
    """Solve (E_J_sum, d_asym, E_C) reproducing target frequencies in MHz"""
    if f01_max < f01_min:
        raise DomainError("f01_max must not be below f01_min")
    if eta >= 0:
        raise DomainError("anharmonicity must be negative")
    if kind is None:
        kind = QubitKind.FIXED if f01_max == f01_min else QubitKind.TUNABLE

    def eta_residual(E_C: float) -> float:
        return _eta(_solve_ej(f01_max, E_C), E_C) - eta

    # E_C in GHz; anharmonicity magnitude is E_C times a factor slightly above 1
    lo, hi = 0.3 * abs(eta) / 1e3, 1.2 * abs(eta) / 1e3
    try:
        r_lo, r_hi = eta_residual(lo), eta_residual(hi)
    except NoSolution as e:
        raise NoSolution(
            f"targets ({f01_max}, {f01_min}, {eta}) unreachable: {e}"
        ) from e
    if r_lo * r_hi > 0:
        raise NoSolution(f"anharmonicity {eta} MHz cannot be met at f01={f01_max} MHz")
    E_C = float(optimize.brentq(eta_residual, lo, hi, xtol=1e-13))
    E_J_sum = _solve_ej(f01_max, E_C)

    d_asym = 0.0
    if kind is QubitKind.TUNABLE:
        E_J_min = _solve_ej(f01_min, E_C)
        d_asym = E_J_min / E_J_sum
        if d_asym >= 1.0 - 1e-9:
            raise NoSolution(
                f"{label or 'qubit'}: tunable kind needs f01_min < f01_max"
            )
    logger.debug(
        "solved %s: E_J_sum=%.4f GHz E_C=%.4f GHz d=%.4f", label, E_J_sum, E_C, d_asym
    )
    return TransmonSpec(
        kind=kind,
        E_J_sum=E_J_sum,
        E_C=E_C,
        d_asym=d_asym,
        label=label,
        design_class=design_class,
    )


def assembly_permutations(dies_available: int, slots: int) -> int:
    """Number of ordered die selections filling the given module slots"""
    if not isinstance(dies_available, int) or not isinstance(slots, int):
        raise DomainError("counts must be integers")
    if slots < 0 or dies_available < slots:
        raise DomainError("need dies_available >= slots >= 0")
    return math.perm(dies_available, slots)
