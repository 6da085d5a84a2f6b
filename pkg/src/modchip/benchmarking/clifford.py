"""
Two-qubit Clifford group (11520 elements modulo global phase).

Elements are written as l * r where l is a layer of single-qubit Cliffords
(C1 x C1, 576 elements) and r is one of 20 coset representatives reached by
breadth-first search over words "native gate after a local layer". The
search depth of a representative is its native-gate count, so compiled
elements never need more than three native gates.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..dynamics.fidelity import CZ, ISWAP
from ..dynamics.sidebands import GateType
from ..errors import DomainError

logger = logging.getLogger(__name__)

SINGLE_QUBIT_ORDER = 24
LOCAL_ORDER = SINGLE_QUBIT_ORDER**2
GROUP_ORDER = 11520

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])


def phase_key(U: np.ndarray) -> bytes:
    """Hashable key of a unitary up to global phase"""
    flat = U.ravel()
    pivot = flat[int(np.argmax(np.abs(flat) > 1e-6))]
    normalized = np.round(U * (abs(pivot) / pivot), 6) + (0.0 + 0.0j)
    return normalized.tobytes()


def equal_up_to_phase(U: np.ndarray, V: np.ndarray, atol: float = 1e-9) -> bool:
    overlap = np.trace(U.conj().T @ V)
    return bool(abs(abs(overlap) - U.shape[0]) < atol * U.shape[0])


@lru_cache(maxsize=1)
def single_qubit_cliffords() -> Tuple[np.ndarray, ...]:
    """The 24 single-qubit Cliffords, identity first"""
    elements = [np.eye(2, dtype=complex)]
    seen = {phase_key(elements[0])}
    queue = list(elements)
    while queue:
        U = queue.pop(0)
        for G in (_H, _S):
            V = G @ U
            key = phase_key(V)
            if key not in seen:
                seen.add(key)
                elements.append(V)
                queue.append(V)
    if len(elements) != SINGLE_QUBIT_ORDER:
        raise RuntimeError(f"C1 closure gave {len(elements)} elements")
    return tuple(elements)


def native_unitary(native: GateType) -> np.ndarray:
    return ISWAP if native is GateType.ISWAP else CZ


@dataclass(frozen=True)
class Step:
    """One layer of a compiled circuit: local Cliffords (a, b) or the native gate"""

    native: bool
    local: Tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class CompiledClifford:
    steps: Tuple[Step, ...]
    native: GateType

    @property
    def native_count(self) -> int:
        return sum(1 for s in self.steps if s.native)

    def unitary(self) -> np.ndarray:
        C1 = single_qubit_cliffords()
        U = np.eye(4, dtype=complex)
        for step in self.steps:
            if step.native:
                U = native_unitary(self.native) @ U
            else:
                U = np.kron(C1[step.local[0]], C1[step.local[1]]) @ U
        return U


class CliffordGroup:
    """Indexed two-qubit Clifford group compiled against one native gate"""

    def __init__(self, native: GateType = GateType.CZ02):
        self.native = GateType.ISWAP if native is GateType.ISWAP else GateType.CZ02
        C1 = single_qubit_cliffords()
        self._local = [np.kron(a, b) for a in C1 for b in C1]
        self._lookup: Dict[bytes, int] = {}
        self._reps: List[np.ndarray] = []
        self._words: List[Tuple[Step, ...]] = []
        self._build()

    def _add_coset(self, rep: np.ndarray, word: Tuple[Step, ...]) -> None:
        coset = len(self._reps)
        self._reps.append(rep)
        self._words.append(word)
        for i, l in enumerate(self._local):
            self._lookup[phase_key(l @ rep)] = coset * LOCAL_ORDER + i

    def _build(self) -> None:
        N = native_unitary(self.native)
        self._add_coset(np.eye(4, dtype=complex), ())
        frontier = [0]
        while frontier:
            next_frontier = []
            for coset in frontier:
                rep, word = self._reps[coset], self._words[coset]
                for i, l in enumerate(self._local):
                    candidate = N @ l @ rep
                    if phase_key(candidate) in self._lookup:
                        continue
                    local = Step(False, divmod(i, SINGLE_QUBIT_ORDER))
                    steps = word + ((local,) if i else ()) + (Step(True),)
                    self._add_coset(candidate, steps)
                    next_frontier.append(len(self._reps) - 1)
            frontier = next_frontier
        if len(self._lookup) != GROUP_ORDER:
            raise RuntimeError(f"Clifford closure gave {len(self._lookup)} elements")
        logger.debug("built %s Clifford cosets: %d", self.native.value, len(self._reps))

    def __len__(self) -> int:
        return GROUP_ORDER

    @property
    def coset_count(self) -> int:
        return len(self._reps)

    def coset_depths(self) -> List[int]:
        return [sum(1 for s in word if s.native) for word in self._words]

    def unitary(self, index: int) -> np.ndarray:
        if not 0 <= index < GROUP_ORDER:
            raise DomainError(f"Clifford index {index} out of range")
        coset, local = divmod(index, LOCAL_ORDER)
        return self._local[local] @ self._reps[coset]

    def index(self, U: np.ndarray) -> int:
        try:
            return self._lookup[phase_key(U)]
        except KeyError:
            raise DomainError("unitary is not a two-qubit Clifford") from None

    def inverse(self, index: int) -> int:
        return self.index(self.unitary(index).conj().T)

    def compose(self, indices: List[int]) -> np.ndarray:
        """Unitary of the elements applied in order"""
        U = np.eye(4, dtype=complex)
        for i in indices:
            U = self.unitary(i) @ U
        return U

    def compile(self, index: int) -> CompiledClifford:
        coset, local = divmod(self.index(self.unitary(index)), LOCAL_ORDER)
        steps = self._words[coset]
        if local:
            steps = steps + (Step(False, divmod(local, SINGLE_QUBIT_ORDER)),)
        return CompiledClifford(steps, self.native)


@lru_cache(maxsize=2)
def _group(native: GateType) -> CliffordGroup:
    return CliffordGroup(native)


def clifford_group(native: GateType = GateType.CZ02) -> CliffordGroup:
    return _group(GateType.ISWAP if native is GateType.ISWAP else GateType.CZ02)


def compile_to_native(index: int, native: GateType = GateType.CZ02) -> CompiledClifford:
    """Local layers and native gates whose product is the element (up to phase)"""
    return clifford_group(native).compile(index)


@dataclass(frozen=True)
class CliffordSequence:
    """Random Clifford elements followed by the element that undoes them"""

    elements: Tuple[int, ...]
    inverse: int
    interleaved: Optional[GateType] = None
    native: GateType = GateType.CZ02

    @property
    def length(self) -> int:
        return len(self.elements)

    def operations(self) -> List[Tuple[str, int]]:
        """("clifford", index) and ("interleaved", 0) items in execution order"""
        ops: List[Tuple[str, int]] = []
        for element in self.elements:
            ops.append(("clifford", element))
            if self.interleaved is not None:
                ops.append(("interleaved", 0))
        ops.append(("clifford", self.inverse))
        return ops

    def total_unitary(self) -> np.ndarray:
        group = clifford_group(self.native)
        U = np.eye(4, dtype=complex)
        for kind, index in self.operations():
            if kind == "clifford":
                U = group.unitary(index) @ U
            else:
                U = native_unitary(self.interleaved or self.native) @ U
        return U

    def verify(self) -> bool:
        return equal_up_to_phase(self.total_unitary(), np.eye(4))


def sample_clifford_sequence(
    m: int,
    seed: Union[int, np.random.SeedSequence, None] = None,
    interleave: Optional[GateType] = None,
    native: GateType = GateType.CZ02,
) -> CliffordSequence:
    """m uniformly random elements, optional interleaved gate, and the inversion"""
    if m < 1:
        raise DomainError("sequence length must be at least 1")
    group = clifford_group(native)
    rng = np.random.default_rng(seed)
    elements = tuple(int(i) for i in rng.integers(0, GROUP_ORDER, size=m))
    U = np.eye(4, dtype=complex)
    for element in elements:
        U = group.unitary(element) @ U
        if interleave is not None:
            U = native_unitary(interleave) @ U
    inverse = group.index(U.conj().T)
    sequence = CliffordSequence(elements, inverse, interleave, group.native)
    if not sequence.verify():
        raise RuntimeError("sampled sequence does not compose to the identity")
    return sequence
