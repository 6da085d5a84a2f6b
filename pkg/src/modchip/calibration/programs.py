"""
Programs accepted by a virtual device: gate circuits and pulse schedules.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..dynamics.fidelity import ideal_gate
from ..dynamics.pulses import FluxPulse
from ..dynamics.sidebands import GateType
from ..errors import DomainError

Counts = Dict[str, int]

CLIFFORD_MARKER = "clifford"

X90 = np.array([[1, -1j], [-1j, 1]], dtype=complex) / np.sqrt(2)
X180 = np.array([[0, 1], [1, 0]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def rz(angle: float) -> np.ndarray:
    """Phase e^{-i angle} on |1>"""
    return np.diag([1.0, np.exp(-1j * angle)])


@dataclass(frozen=True)
class GateOp:
    """Ideal single- or two-qubit gate given by its matrix"""

    name: str
    qubits: Tuple[str, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class NativeOp:
    """Calibrated two-qubit gate on an inter-chip pair"""

    pair: str
    gate: GateType
    qubits: Tuple[str, str]


@dataclass(frozen=True)
class IdleOp:
    duration: float  # ns
    qubits: Tuple[str, ...]


@dataclass(frozen=True)
class MarkerOp:
    """Tag with no unitary action; e.g. the end of one Clifford element"""

    label: str
    qubits: Tuple[str, ...]


Operation = Union[GateOp, NativeOp, IdleOp, MarkerOp]


@dataclass
class Circuit:
    """Gate sequence on named qubits, all prepared in |0> and measured at the end"""

    qubits: Tuple[str, ...]
    ops: List[Operation] = field(default_factory=list)
    measured: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if len(set(self.qubits)) != len(self.qubits):
            raise DomainError("circuit qubits must be distinct")
        self.qubits = tuple(self.qubits)
        if self.measured is None:
            self.measured = self.qubits

    def _check(self, qubits: Sequence[str]) -> Tuple[str, ...]:
        unknown = [q for q in qubits if q not in self.qubits]
        if unknown:
            raise DomainError(f"qubits {unknown} are not part of the circuit")
        return tuple(qubits)

    def gate(self, name: str, qubits: Sequence[str], matrix: np.ndarray) -> "Circuit":
        qubits = self._check(qubits)
        if np.shape(matrix) != (2 ** len(qubits),) * 2:
            raise DomainError(f"{name}: matrix does not act on {len(qubits)} qubit(s)")
        self.ops.append(GateOp(name, qubits, np.asarray(matrix, dtype=complex)))
        return self

    def x90(self, q: str) -> "Circuit":
        return self.gate("x90", [q], X90)

    def x(self, q: str) -> "Circuit":
        return self.gate("x", [q], X180)

    def h(self, q: str) -> "Circuit":
        return self.gate("h", [q], HADAMARD)

    def rz(self, q: str, angle: float) -> "Circuit":
        return self.gate("rz", [q], rz(angle))

    def native(self, pair: str, gate: GateType, qubits: Sequence[str]) -> "Circuit":
        a, b = self._check(qubits)
        self.ops.append(NativeOp(pair, gate, (a, b)))
        return self

    def idle(
        self, duration: float, qubits: Optional[Sequence[str]] = None
    ) -> "Circuit":
        if duration < 0:
            raise DomainError("idle duration must be non-negative")
        if duration > 0:
            self.ops.append(IdleOp(duration, self._check(qubits or self.qubits)))
        return self

    def marker(self, label: str, qubits: Optional[Sequence[str]] = None) -> "Circuit":
        self.ops.append(MarkerOp(label, self._check(qubits or self.qubits)))
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        self._check(other.qubits)
        self.ops.extend(other.ops)
        return self


@dataclass(frozen=True)
class PulseProgram:
    """Prepare a pair state, apply a flux pulse of each duration, measure the pair.

    Qubit order in the returned bitstrings is (fixed, tunable).
    """

    pair: str
    pulse: FluxPulse
    durations: Tuple[float, ...]
    prepare: str = "01"

    def __post_init__(self) -> None:
        if not self.durations or min(self.durations) <= 0:
            raise DomainError("pulse durations must be positive and non-empty")
        if self.prepare not in ("00", "01", "10", "11"):
            raise DomainError(f"cannot prepare state {self.prepare!r}")


Program = Union[Circuit, PulseProgram]


def population(counts: Counts, bit: int = 1, position: int = 0) -> float:
    """Share of shots whose bit at `position` equals `bit`"""
    total = sum(counts.values())
    if total == 0:
        return 0.0
    hits = sum(n for key, n in counts.items() if key[position] == str(bit))
    return hits / total


def state_population(counts: Counts, state: str) -> float:
    total = sum(counts.values())
    return counts.get(state, 0) / total if total else 0.0


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Ideal unitary of a circuit; qubit order is circuit.qubits, first qubit MSB

    Native gates are replaced by their ideal matrices, idles and markers by
    the identity.
    """
    n = len(circuit.qubits)
    U = np.eye(2**n, dtype=complex).reshape([2] * n + [2**n])
    for op in circuit.ops:
        if isinstance(op, GateOp):
            matrix, qubits = op.matrix, op.qubits
        elif isinstance(op, NativeOp):
            matrix, qubits = ideal_gate(op.gate), op.qubits
        else:
            continue
        k = len(qubits)
        axes = [circuit.qubits.index(q) for q in qubits]
        tensor = matrix.reshape([2] * (2 * k))
        U = np.tensordot(tensor, U, axes=(list(range(k, 2 * k)), axes))
        U = np.moveaxis(U, list(range(k)), axes)
    return U.reshape(2**n, 2**n)
