"""
Virtual devices executing circuits and pulse programs.

`VirtualDevice` is the only surface calibration, benchmarking and Bell
protocols talk to. `SimulatedDevice` implements it with density matrices:
two-qubit gates come from the dynamics engine (or ideal gates followed by
decoherence), single-qubit gates are ideal, and readout applies a symmetric
bit flip before sampling.
"""

import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..config import CHEVRON_TOLERANCE
from ..device.topology import DeviceTopology
from ..dynamics.fidelity import ProcessMap, ideal_gate
from ..dynamics.gates import design_gate_pulse, simulate_gate
from ..dynamics.hamiltonian import static_zz
from ..dynamics.propagate import evolve_unitary, propagators_at
from ..dynamics.pulses import Envelope, FluxPulse
from ..dynamics.sidebands import GateType
from ..dynamics.system import pair_noise, pair_system
from ..errors import DomainError
from .programs import (
    Circuit,
    Counts,
    GateOp,
    IdleOp,
    MarkerOp,
    NativeOp,
    CLIFFORD_MARKER,
    Program,
    PulseProgram,
    rz,
)

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence, None]


def _root(seed: Seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    return np.random.SeedSequence(seed)


def spawn_seeds(seed: Seed, n: int) -> List[np.random.SeedSequence]:
    """Independent child seeds for n sub-runs of one protocol

    Calling twice with the same seed gives the same children.
    """
    return _root(seed).spawn(n)


def child_seed(seed: Seed, *key: int) -> np.random.SeedSequence:
    """Seed addressed by an integer path below the given seed"""
    root = _root(seed)
    return np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + key)


_PAULIS = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.diag([1.0, -1.0]).astype(complex),
]


class NativeMode(Enum):
    IDEAL = "ideal"
    ENGINE = "engine"


@dataclass
class DeviceNoise:
    """Error knobs of a simulated device on top of the topology's coherence times"""

    native_depolarizing: Dict[str, float] = field(default_factory=dict)
    clifford_depolarizing: float = 0.0
    frequency_offset_MHz: Dict[str, float] = field(default_factory=dict)
    # qubit -> [(clock seconds, T1 in us)], piecewise constant from each time on
    t1_schedule: Dict[str, List[Tuple[float, float]]] = field(default_factory=dict)
    decoherence: bool = True
    idle_zz: bool = True

    def __post_init__(self) -> None:
        for label, lam in self.native_depolarizing.items():
            if not 0.0 <= lam <= 16.0 / 15.0:
                raise DomainError(f"depolarizing strength for {label} out of range")
        if not 0.0 <= self.clifford_depolarizing <= 16.0 / 15.0:
            raise DomainError("Clifford depolarizing strength out of range")


class VirtualDevice(ABC):
    """Executes programs and returns bitstring counts per program result"""

    @property
    @abstractmethod
    def topology(self) -> DeviceTopology:
        ...

    @property
    @abstractmethod
    def clock(self) -> float:
        """Device time in seconds"""

    @abstractmethod
    def execute(self, program: Program, shots: int, seed: Seed = None) -> List[Counts]:
        """Circuits give one Counts; pulse programs give one per duration"""

    @abstractmethod
    def set_gate_pulse(self, pair: str, gate: GateType, pulse: FluxPulse) -> None:
        """Install the pulse used for native gates on a pair"""

    @abstractmethod
    def advance(self, seconds: float) -> None:
        """Let device time pass without running anything"""

    def run(self, circuit: Circuit, shots: int, seed: Seed = None) -> Counts:
        return self.execute(circuit, shots, seed)[0]


# density-matrix helpers on qubit components


def _apply(
    rho: np.ndarray, n: int, targets: Sequence[int], op: np.ndarray
) -> np.ndarray:
    """op rho op^+ with op acting on the target positions of an n-qubit rho"""
    k = len(targets)
    tensor = rho.reshape([2] * (2 * n))
    op_t = op.reshape([2] * (2 * k))
    rows = list(targets)
    cols = [n + t for t in targets]
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), rows))
    out = np.moveaxis(out, list(range(k)), rows)
    out = np.tensordot(op_t.conj(), out, axes=(list(range(k, 2 * k)), cols))
    out = np.moveaxis(out, list(range(k)), cols)
    return out.reshape(2**n, 2**n)


def _channel(
    rho: np.ndarray, n: int, targets: Sequence[int], kraus: Sequence[np.ndarray]
) -> np.ndarray:
    out = np.zeros_like(rho)
    for K in kraus:
        out += _apply(rho, n, targets, K)
    return out


def depolarizing_kraus(lam: float, n_qubits: int) -> List[np.ndarray]:
    """rho -> (1 - lam) rho + lam * I/d (applied on the targets)"""
    paulis = [reduce(np.kron, combo) for combo in _pauli_products(n_qubits)]
    d2 = len(paulis)
    weights = [1.0 - lam * (d2 - 1) / d2] + [lam / d2] * (d2 - 1)
    return [np.sqrt(w) * P for w, P in zip(weights, paulis) if w > 0]


def _pauli_products(n: int) -> List[Tuple[np.ndarray, ...]]:
    combos: List[Tuple[np.ndarray, ...]] = [()]
    for _ in range(n):
        combos = [c + (P,) for c in combos for P in _PAULIS]
    return combos


def decoherence_kraus(
    duration_ns: float, T1_us: float, T2_us: float
) -> List[np.ndarray]:
    """Amplitude damping followed by pure dephasing over a duration"""
    t_us = duration_ns * 1e-3
    gamma = 1.0 - np.exp(-t_us / T1_us)
    rate_phi = max(1.0 / T2_us - 0.5 / T1_us, 0.0)
    lam = np.exp(-t_us * rate_phi)
    damping = [
        np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex),
    ]
    dephasing = [
        np.sqrt((1 + lam) / 2) * _PAULIS[0],
        np.sqrt((1 - lam) / 2) * _PAULIS[3],
    ]
    return [D @ A for D in dephasing for A in damping]


def kraus_from_process(process: ProcessMap, cutoff: float = 1e-12) -> List[np.ndarray]:
    d = process.dim
    w, v = np.linalg.eigh(0.5 * (process.choi() + process.choi().conj().T))
    return [
        np.sqrt(val) * v[:, i].reshape(d, d).T
        for i, val in enumerate(w)
        if val > cutoff
    ]


def _collapse_superop(levels: int) -> np.ndarray:
    """Superoperator mapping two L-level transmons to qubits; |2> reads as |1>"""
    keep = np.zeros((2, levels))
    keep[0, 0] = keep[1, 1] = 1.0
    single = []
    for k in range(2, levels):
        op = np.zeros((2, levels))
        op[1, k] = 1.0
        single.append(op)
    ops = [keep] + single
    S = np.zeros((16, levels**4), dtype=complex)
    for A in ops:
        for B in ops:
            K = np.kron(A, B)
            S += np.kron(K, K.conj())
    return S


def _embed_superop(levels: int) -> np.ndarray:
    V = np.zeros((levels**2, 4))
    for col, idx in enumerate((0, 1, levels, levels + 1)):
        V[idx, col] = 1.0
    return np.kron(V, V)


class _State:
    """Product of independent density-matrix components"""

    def __init__(self, qubits: Sequence[str]):
        zero = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        self.components: List[Tuple[List[str], np.ndarray]] = [
            ([q], zero.copy()) for q in qubits
        ]

    def _find(self, q: str) -> int:
        for i, (labels, _) in enumerate(self.components):
            if q in labels:
                return i
        raise DomainError(f"qubit {q} not in state")

    def _merged(self, qubits: Sequence[str]) -> int:
        idx = sorted({self._find(q) for q in qubits})
        if len(idx) == 1:
            return idx[0]
        labels: List[str] = []
        rho = np.ones((1, 1), dtype=complex)
        for i in idx:
            labels += self.components[i][0]
            rho = np.kron(rho, self.components[i][1])
        for i in reversed(idx):
            del self.components[i]
        self.components.append((labels, rho))
        return len(self.components) - 1

    def channel(self, qubits: Sequence[str], kraus: Sequence[np.ndarray]) -> None:
        i = self._merged(qubits)
        labels, rho = self.components[i]
        targets = [labels.index(q) for q in qubits]
        self.components[i] = (labels, _channel(rho, len(labels), targets, kraus))

    def unitary(self, qubits: Sequence[str], U: np.ndarray) -> None:
        self.channel(qubits, [U])

    def probabilities(self, measured: Sequence[str]) -> np.ndarray:
        """Joint distribution over measured qubits, first qubit most significant"""
        probs = np.ones(())
        order: List[str] = []
        for labels, rho in self.components:
            p = np.clip(np.real(np.diag(rho)), 0.0, None).reshape([2] * len(labels))
            keep = [k for k, q in enumerate(labels) if q in measured]
            drop = tuple(k for k in range(len(labels)) if k not in keep)
            p = p.sum(axis=drop) if drop else p
            probs = np.multiply.outer(probs, p)
            order += [labels[k] for k in keep]
        perm = [order.index(q) for q in measured]
        return np.transpose(probs, perm)


def _apply_readout(probs: np.ndarray, errors: Sequence[float]) -> np.ndarray:
    for axis, eps in enumerate(errors):
        if eps > 0:
            flip = np.array([[1 - eps, eps], [eps, 1 - eps]])
            probs = np.moveaxis(np.tensordot(flip, probs, axes=([1], [axis])), 0, axis)
    return probs


def _sample(probs: np.ndarray, shots: int, rng: np.random.Generator) -> Counts:
    flat = probs.ravel()
    flat = flat / flat.sum()
    counts = rng.multinomial(shots, flat)
    n = probs.ndim
    return {format(i, f"0{n}b"): int(c) for i, c in enumerate(counts) if c > 0}


class SimulatedDevice(VirtualDevice):
    """Density-matrix model of the four-die device"""

    def __init__(
        self,
        topology: DeviceTopology,
        noise: Optional[DeviceNoise] = None,
        native_mode: NativeMode = NativeMode.IDEAL,
        gate_pulses: Optional[Dict[Tuple[str, GateType], FluxPulse]] = None,
        seconds_per_shot: float = 1e-4,
    ):
        self._topology = topology
        self.noise = noise or DeviceNoise()
        self.native_mode = native_mode
        self._pulses: Dict[Tuple[str, GateType], FluxPulse] = dict(gate_pulses or {})
        self._native_cache: Dict[Tuple[str, GateType, float], List[np.ndarray]] = {}
        self._zz_cache: Dict[str, float] = {}
        self._lock = threading.Lock()
        self._clock = 0.0
        self.seconds_per_shot = seconds_per_shot

    @property
    def topology(self) -> DeviceTopology:
        return self._topology

    @property
    def clock(self) -> float:
        return self._clock

    def advance(self, seconds: float) -> None:
        with self._lock:
            self._clock += seconds

    def set_gate_pulse(self, pair: str, gate: GateType, pulse: FluxPulse) -> None:
        label = self._topology.pair(pair).label
        with self._lock:
            self._pulses[(label, gate)] = pulse
            self._native_cache = {
                k: v for k, v in self._native_cache.items() if k[:2] != (label, gate)
            }

    def gate_pulse(self, pair: str, gate: GateType) -> FluxPulse:
        label = self._topology.pair(pair).label
        with self._lock:
            pulse = self._pulses.get((label, gate))
        if pulse is None:
            system = pair_system(self._topology, label)
            phi_ac = self._topology.pair(label).phi_ac
            designed = design_gate_pulse(system, gate, phi_ac)
            # first design stored wins; a concurrent set_gate_pulse is kept
            with self._lock:
                pulse = self._pulses.setdefault((label, gate), designed)
        return pulse

    def zz_shift(self, pair: str) -> float:
        """Exact static ZZ (MHz) of a pair at its parking point"""
        label = self._topology.pair(pair).label
        if label not in self._zz_cache:
            self._zz_cache[label] = static_zz(pair_system(self._topology, label))
        return self._zz_cache[label]

    def coherence(self, qubit: str, modulated: bool = False) -> Tuple[float, float]:
        """(T1, T2) in us at the current clock, schedule applied"""
        T1, T2 = self._topology.qubit(qubit).noise.times(modulated)
        schedule = self.noise.t1_schedule.get(qubit)
        if schedule:
            active = [t1 for start, t1 in sorted(schedule) if start <= self._clock]
            if active:
                T1 = active[-1]
        return T1, min(T2, 2.0 * T1)

    def execute(self, program: Program, shots: int, seed: Seed = None) -> List[Counts]:
        if shots <= 0:
            raise DomainError("shots must be positive")
        rng = np.random.default_rng(seed)
        with self._lock:
            if isinstance(program, PulseProgram):
                results = self._run_pulse(program, shots, rng)
            else:
                results = [self._run_circuit(program, shots, rng)]
            self._clock += shots * len(results) * self.seconds_per_shot
        return results

    # circuits

    def _decohere(
        self,
        state: _State,
        qubits: Sequence[str],
        duration: float,
        modulated: Sequence[str] = (),
    ) -> None:
        if not self.noise.decoherence or duration <= 0:
            return
        for q in qubits:
            T1, T2 = self.coherence(q, q in modulated)
            state.channel([q], decoherence_kraus(duration, T1, T2))

    def _idle(self, state: _State, op: IdleOp) -> None:
        t_us = op.duration * 1e-3
        for q in op.qubits:
            offset = self.noise.frequency_offset_MHz.get(q, 0.0)
            if offset:
                state.unitary([q], rz(2 * np.pi * offset * t_us))
        if self.noise.idle_zz:
            for pair in self._topology.pairs:
                if pair.fixed in op.qubits and pair.tunable in op.qubits:
                    chi = self.zz_shift(pair.label)
                    phase = np.diag([1, 1, 1, np.exp(-2j * np.pi * chi * t_us)])
                    state.unitary([pair.fixed, pair.tunable], phase)
        self._decohere(state, op.qubits, op.duration)

    def _native_kraus(self, op: NativeOp) -> List[np.ndarray]:
        pair = self._topology.pair(op.pair)
        key = (pair.label, op.gate, self._clock if self.noise.t1_schedule else 0.0)
        if key in self._native_cache:
            return self._native_cache[key]
        pulse = self.gate_pulse(pair.label, op.gate)
        if self.native_mode is NativeMode.ENGINE:
            system = pair_system(self._topology, pair.label)
            noise = None
            if self.noise.decoherence:
                noise = pair_noise(self._topology, pair.label)
            result = simulate_gate(
                system, pulse, op.gate, noise=noise, tol=CHEVRON_TOLERANCE
            )
            process = result.propagator
            if not isinstance(process, ProcessMap):
                process = ProcessMap.from_unitary(process)
            L = system.levels
            S = _collapse_superop(L) @ process.superop @ _embed_superop(L)
            a, b = result.z_phases
            Z = np.diag(np.exp(1j * np.array([0.0, b, a, a + b])))
            kraus = kraus_from_process(ProcessMap(np.kron(Z, Z.conj()) @ S, 4))
        else:
            U = ideal_gate(op.gate)
            kraus = [U]
            if self.noise.decoherence:
                fixed = decoherence_kraus(pulse.duration, *self.coherence(pair.fixed))
                tunable = decoherence_kraus(
                    pulse.duration, *self.coherence(pair.tunable, modulated=True)
                )
                kraus = [np.kron(A, B) @ U for A in fixed for B in tunable]
        lam = self.noise.native_depolarizing.get(pair.label, 0.0)
        if lam > 0:
            kraus = [D @ K for D in depolarizing_kraus(lam, 2) for K in kraus]
        self._native_cache[key] = kraus
        return kraus

    def _run_circuit(
        self, circuit: Circuit, shots: int, rng: np.random.Generator
    ) -> Counts:
        state = _State(circuit.qubits)
        for op in circuit.ops:
            if isinstance(op, GateOp):
                state.unitary(op.qubits, op.matrix)
            elif isinstance(op, NativeOp):
                pair = self._topology.pair(op.pair)
                if op.qubits != (pair.fixed, pair.tunable):
                    raise DomainError(
                        f"native gate on {pair.label} must act on "
                        f"({pair.fixed}, {pair.tunable})"
                    )
                state.channel(op.qubits, self._native_kraus(op))
            elif isinstance(op, IdleOp):
                self._idle(state, op)
            elif isinstance(op, MarkerOp):
                lam = self.noise.clifford_depolarizing
                if op.label == CLIFFORD_MARKER and lam > 0:
                    state.channel(op.qubits, depolarizing_kraus(lam, len(op.qubits)))
        measured = list(circuit.measured or circuit.qubits)
        probs = state.probabilities(measured)
        errors = [self._topology.qubit(q).readout_error for q in measured]
        return _sample(_apply_readout(probs, errors), shots, rng)

    def _pulse_propagators(
        self, program: PulseProgram, durations: np.ndarray
    ) -> np.ndarray:
        system = pair_system(self._topology, program.pair)
        pulse = program.pulse
        if pulse.envelope is Envelope.RECTANGULAR or pulse.rise_ns == 0:
            order = np.argsort(durations)
            longest = pulse.with_duration(float(durations.max()))
            stack = propagators_at(
                system, longest, durations[order], tol=CHEVRON_TOLERANCE
            )
            out = np.empty_like(stack)
            out[order] = stack
            return out
        return np.array(
            [
                evolve_unitary(
                    system, pulse.with_duration(float(t)), tol=CHEVRON_TOLERANCE
                )
                for t in durations
            ]
        )

    def _run_pulse(
        self, program: PulseProgram, shots: int, rng: np.random.Generator
    ) -> List[Counts]:
        pair = self._topology.pair(program.pair)
        levels = pair_system(self._topology, pair.label).levels
        durations = np.asarray(program.durations, dtype=float)
        start = int(program.prepare[0]) * levels + int(program.prepare[1])
        collapse = _collapse_superop(levels)
        measured = [pair.fixed, pair.tunable]
        errors = [self._topology.qubit(q).readout_error for q in measured]
        modulated = [pair.tunable] if program.pulse.modulated else []
        results = []
        for U, t in zip(self._pulse_propagators(program, durations), durations):
            psi = U[:, start]
            rho = (collapse @ np.outer(psi, psi.conj()).reshape(-1)).reshape(4, 4)
            state = _State(measured)
            state.components = [(list(measured), rho)]
            self._decohere(state, measured, float(t), modulated)
            probs = state.probabilities(measured)
            results.append(_sample(_apply_readout(probs, errors), shots, rng))
        return results
