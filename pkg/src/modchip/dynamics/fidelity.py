"""
Gate metrics on the two-qubit computational subspace.

Results are either full-space unitaries (ndarray) or ProcessMap
superoperators; both are restricted to the computational states
|00>, |01>, |10>, |11> before comparison with a 4x4 target.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from ..errors import DimensionMismatch
from .sidebands import GateType

COMPUTATIONAL_DIM = 4

IDENTITY = np.eye(COMPUTATIONAL_DIM, dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
ISWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def ideal_gate(gate: GateType) -> np.ndarray:
    return ISWAP.copy() if gate is GateType.ISWAP else CZ.copy()


@dataclass
class ProcessMap:
    """Linear map on density matrices as a row-stacked superoperator"""

    superop: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        if self.superop.shape != (self.dim**2, self.dim**2):
            raise DimensionMismatch(
                f"superoperator {self.superop.shape} does not act on dim {self.dim}"
            )

    @classmethod
    def from_unitary(cls, U: np.ndarray) -> "ProcessMap":
        return cls(np.kron(U, U.conj()), U.shape[0])

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        flat = np.asarray(rho).reshape(-1, d * d)
        out = flat @ self.superop.T
        return out.reshape(np.shape(rho))

    def restrict(self, indices: Sequence[int]) -> "ProcessMap":
        d, idx = self.dim, list(indices)
        S4 = self.superop.reshape(d, d, d, d)
        block = S4[np.ix_(idx, idx, idx, idx)]
        n = len(idx)
        return ProcessMap(block.reshape(n * n, n * n), n)

    def choi(self) -> np.ndarray:
        d = self.dim
        S4 = self.superop.reshape(d, d, d, d)
        return S4.transpose(2, 0, 3, 1).reshape(d * d, d * d)

    def trace_defect(self) -> float:
        d = self.dim
        S4 = self.superop.reshape(d, d, d, d)
        return float(np.max(np.abs(np.einsum("kkij->ij", S4) - np.eye(d))))

    def is_cptp(self, tol: float = 1e-9) -> bool:
        C = self.choi()
        eigenvalues = np.linalg.eigvalsh(0.5 * (C + C.conj().T))
        return bool(eigenvalues.min() >= -tol and self.trace_defect() <= tol)


Result = Union[np.ndarray, ProcessMap]


def _levels(dim: int) -> int:
    if dim == COMPUTATIONAL_DIM:
        return 2
    levels = math.isqrt(dim)
    if levels * levels != dim or levels < 3:
        raise DimensionMismatch(f"dimension {dim} is not a two-transmon space")
    return levels


def computational_indices(dim: int) -> Tuple[int, int, int, int]:
    L = _levels(dim)
    return (0, 1, L, L + 1)


def computational_block(result: Result) -> Result:
    if isinstance(result, ProcessMap):
        return result.restrict(computational_indices(result.dim))
    U = np.asarray(result)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionMismatch(f"expected a square operator, got shape {U.shape}")
    idx = computational_indices(U.shape[0])
    return U[np.ix_(idx, idx)]


def _check_target(target: np.ndarray) -> None:
    if np.shape(target) != (COMPUTATIONAL_DIM, COMPUTATIONAL_DIM):
        raise DimensionMismatch("target must be a 4x4 unitary")


def _stay_probability(block: Result) -> float:
    if isinstance(block, ProcessMap):
        rho = np.eye(COMPUTATIONAL_DIM) / COMPUTATIONAL_DIM
        return float(np.real(np.trace(block.apply(rho))))
    return float(np.real(np.trace(block.conj().T @ block))) / COMPUTATIONAL_DIM


def process_fidelity(result: Result, target: np.ndarray) -> float:
    _check_target(target)
    block = computational_block(result)
    d = COMPUTATIONAL_DIM
    if isinstance(block, ProcessMap):
        S_target = np.kron(target, target.conj())
        return float(np.real(np.trace(S_target.conj().T @ block.superop))) / d**2
    return float(abs(np.trace(target.conj().T @ block)) ** 2) / d**2


def leakage(result: Result) -> float:
    """Average population leaving the computational subspace"""
    stay = _stay_probability(computational_block(result))
    return float(np.clip(1.0 - stay, 0.0, 1.0))


def average_gate_fidelity(result: Result, target: np.ndarray) -> float:
    """(d*F_pro + 1)/(d + 1); lost population is reported by leakage()"""
    d = COMPUTATIONAL_DIM
    F_pro = process_fidelity(result, target)
    return float(np.clip((d * F_pro + 1.0) / (d + 1), 0.0, 1.0))


def z_correction(a: float, b: float) -> np.ndarray:
    """diag(1, e^ib, e^ia, e^i(a+b)): phase a on the fixed qubit, b on the tunable"""
    return np.diag(np.exp(1j * np.array([0.0, b, a, a + b])))


def apply_z_correction(result: Result, a: float, b: float) -> Result:
    block = computational_block(result)
    Z = z_correction(a, b)
    if isinstance(block, ProcessMap):
        return ProcessMap(np.kron(Z, Z.conj()) @ block.superop, COMPUTATIONAL_DIM)
    return Z @ block


def optimize_z_phases(result: Result, target: np.ndarray) -> Tuple[float, float]:
    """Single-qubit Z phases (a, b) maximizing process fidelity with the target"""
    _check_target(target)
    block = computational_block(result)

    def loss(x: np.ndarray) -> float:
        return -process_fidelity(apply_z_correction(block, x[0], x[1]), target)

    grid = np.linspace(0, 2 * np.pi, 4, endpoint=False)
    starts = [(a, b) for a in grid for b in grid]
    best = min(starts, key=lambda s: loss(np.array(s)))
    solution = optimize.minimize(
        loss,
        np.array(best),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14},
    )
    a, b = np.mod(solution.x, 2 * np.pi)
    return float(a), float(b)


def conditional_phase(result: Result) -> float:
    """arg(U00 U11 / (U01 U10)) from the diagonal of the computational block"""
    block = computational_block(result)
    if isinstance(block, ProcessMap):
        # coherences |00><10| and |01><11| carry U00 U10* and U01 U11*
        S4 = block.superop.reshape(4, 4, 4, 4)
        value = S4[0, 2, 0, 2] * np.conj(S4[1, 3, 1, 3])
        return float(np.angle(value))
    diag = np.diag(block)
    return float(np.angle(diag[0] * diag[3] / (diag[1] * diag[2])))
