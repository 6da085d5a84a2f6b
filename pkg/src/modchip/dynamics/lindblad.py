"""
Dissipative evolution of a pair in Lindblad form.

Each transmon relaxes along its ladder (|k+1> -> |k> at (k+1)*gamma1) and
dephases through its number operator. Relaxation uses one jump operator per
transition, which keeps the dissipator diagonal-commuting and lets the
coherent part be taken from the unitary propagator on coarse macro steps
(symmetric splitting).
"""

import logging
from typing import Optional, Tuple, Union

import numpy as np
from scipy.linalg import expm

from ..config import LEVELS_PER_TRANSMON, LINDBLAD_STEP_NS, PROPAGATOR_TOLERANCE
from ..errors import DomainError
from .fidelity import IDENTITY, ProcessMap, average_gate_fidelity
from .propagate import ordered_product, propagators_at
from .pulses import FluxPulse
from .system import NoiseSpec, PairSystem

logger = logging.getLogger(__name__)

Rates = Tuple[float, float]


def _single_qubit_jumps(levels: int, rates: Rates) -> list:
    gamma1, gamma_phi = rates
    ops = []
    if gamma1 > 0:
        for k in range(levels - 1):
            L = np.zeros((levels, levels), dtype=complex)
            L[k, k + 1] = np.sqrt((k + 1) * gamma1)
            ops.append(L)
    if gamma_phi > 0:
        number = np.diag(np.arange(levels)).astype(complex)
        ops.append(np.sqrt(2.0 * gamma_phi) * number)
    return ops


def jump_operators(levels: int, fixed: Rates, tunable: Rates) -> list:
    """Collapse operators on the |F T> space for both qubits"""
    eye = np.eye(levels)
    ops = [np.kron(L, eye) for L in _single_qubit_jumps(levels, fixed)]
    ops += [np.kron(eye, L) for L in _single_qubit_jumps(levels, tunable)]
    return ops


def dissipator(levels: int, fixed: Rates, tunable: Rates) -> np.ndarray:
    """Row-stacked superoperator of sum_L (L rho L^+ - {L^+ L, rho}/2)"""
    d = levels**2
    eye = np.eye(d)
    D = np.zeros((d * d, d * d), dtype=complex)
    for L in jump_operators(levels, fixed, tunable):
        LdL = L.conj().T @ L
        D += np.kron(L, L.conj()) - 0.5 * np.kron(LdL, eye) - 0.5 * np.kron(eye, LdL.T)
    return D


def evolve_lindblad(
    pair: PairSystem,
    pulse: FluxPulse,
    noise: NoiseSpec,
    initial: Optional[np.ndarray] = None,
    tol: float = PROPAGATOR_TOLERANCE,
    step_ns: float = LINDBLAD_STEP_NS,
) -> Union[ProcessMap, np.ndarray]:
    """Process map of the pulse, or the evolved density matrices when given"""
    if step_ns <= 0:
        raise DomainError("macro step must be positive")
    fixed, tunable = noise.rates(pulse.modulated)
    D = dissipator(pair.levels, fixed, tunable)
    n_steps = max(1, int(np.ceil(pulse.duration / step_ns - 1e-9)))
    times = np.linspace(0.0, pulse.duration, n_steps + 1)
    U = propagators_at(pair, pulse, times[1:], tol=tol)
    previous = np.concatenate([np.eye(pair.dim)[None], U[:-1]])
    steps = U @ np.conj(np.swapaxes(previous, -1, -2))
    half = expm(0.5 * (pulse.duration / n_steps) * D)
    d2 = pair.dim**2
    unitary_superops = np.einsum("nij,nkl->nikjl", steps, steps.conj()).reshape(
        n_steps, d2, d2
    )
    process = ProcessMap(ordered_product(half @ unitary_superops @ half), pair.dim)
    logger.debug(
        "lindblad %s: %d macro steps, trace defect %.2e",
        pair.label,
        n_steps,
        process.trace_defect(),
    )
    if initial is None:
        return process
    rho = np.asarray(initial, dtype=complex)
    if rho.shape[-2:] != (pair.dim, pair.dim):
        raise DomainError(f"initial state must be {pair.dim}x{pair.dim}")
    return process.apply(rho)


def exchange_averaged(fixed: Rates, tunable: Rates) -> Tuple[Rates, Rates]:
    """Rates seen by both qubits when excitations swap back and forth evenly"""
    mean = (0.5 * (fixed[0] + tunable[0]), 0.5 * (fixed[1] + tunable[1]))
    return mean, mean


def idle_process(
    noise: NoiseSpec,
    duration: float,
    modulated: bool = True,
    levels: int = LEVELS_PER_TRANSMON,
    exchange: bool = False,
) -> ProcessMap:
    """Pure decoherence over `duration` ns with no Hamiltonian.

    With `exchange` both qubits decay at the mean of the two rate sets.
    """
    if duration <= 0:
        raise DomainError("duration must be positive")
    fixed, tunable = noise.rates(modulated)
    if exchange:
        fixed, tunable = exchange_averaged(fixed, tunable)
    D = dissipator(levels, fixed, tunable)
    return ProcessMap(expm(duration * D), levels**2)


def coherence_limited_fidelity(
    noise: NoiseSpec,
    t_gate: float,
    modulated: bool = True,
    exchange: bool = True,
) -> float:
    """Average gate fidelity of an otherwise perfect gate limited by T1 and T2.

    The tunable qubit uses its modulated coherence times when available. By
    default the gate is taken as an ideal coherent exchange, so each qubit
    spends half the gate in the other's environment; `exchange=False` keeps
    the two qubits on their own rates.
    """
    process = idle_process(noise, t_gate, modulated, exchange=exchange)
    return average_gate_fidelity(process, IDENTITY)
