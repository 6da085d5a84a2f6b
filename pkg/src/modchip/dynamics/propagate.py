"""
Unitary evolution of a pair under a flux pulse.

The propagator is built from fourth-order commutator-free Magnus steps
(two exponentials per step on the Gauss-Legendre nodes). Step exponentials
are computed in batches via Hermitian eigendecomposition and multiplied
by pairwise tree reduction. The step size is halved until two successive
refinements agree to the requested tolerance in operator norm.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from ..config import (
    CHEVRON_TOLERANCE,
    CHUNK_STEPS,
    INITIAL_STEP_NS,
    MIN_STEP_NS,
    PROPAGATOR_TOLERANCE,
)
from ..errors import DomainError, StepSizeUnderflow
from .hamiltonian import PairHamiltonian
from .pulses import Envelope, FluxPulse
from .system import PairSystem

logger = logging.getLogger(__name__)

_SQRT3 = np.sqrt(3.0)
_NODES = (0.5 - _SQRT3 / 6.0, 0.5 + _SQRT3 / 6.0)
_ALPHA = ((3.0 - 2.0 * _SQRT3) / 12.0, (3.0 + 2.0 * _SQRT3) / 12.0)


def expm_hermitian(H: np.ndarray, h: float) -> np.ndarray:
    """exp(-i h H) for a stack of Hermitian matrices"""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * h * w)[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def ordered_product(stack: np.ndarray) -> np.ndarray:
    """stack[n-1] @ ... @ stack[0] by pairwise reduction"""
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            eye = np.eye(stack.shape[-1], dtype=stack.dtype)[None]
            stack = np.concatenate([stack, eye])
        stack = stack[1::2] @ stack[0::2]
    return stack[0]


def _segment(ham: PairHamiltonian, t0: float, t1: float, n_steps: int) -> np.ndarray:
    h = (t1 - t0) / n_steps
    U = np.eye(ham.pair.dim, dtype=complex)
    for start in range(0, n_steps, CHUNK_STEPS):
        k = np.arange(start, min(start + CHUNK_STEPS, n_steps))
        t = t0 + k * h
        H1 = ham(t + _NODES[0] * h)
        H2 = ham(t + _NODES[1] * h)
        first = expm_hermitian(_ALPHA[1] * H1 + _ALPHA[0] * H2, h)
        second = expm_hermitian(_ALPHA[0] * H1 + _ALPHA[1] * H2, h)
        U = ordered_product(second @ first) @ U
    return U


def _propagate(ham: PairHamiltonian, times: np.ndarray, dt: float) -> np.ndarray:
    out = np.empty((times.size, ham.pair.dim, ham.pair.dim), dtype=complex)
    U = np.eye(ham.pair.dim, dtype=complex)
    previous = 0.0
    for i, t in enumerate(times):
        if t > previous:
            n_steps = max(1, int(np.ceil((t - previous) / dt - 1e-9)))
            U = _segment(ham, previous, t, n_steps) @ U
        out[i] = U
        previous = t
    return out


def propagators_at(
    pair: PairSystem,
    pulse: FluxPulse,
    times: Sequence[float],
    tol: float = PROPAGATOR_TOLERANCE,
    initial_step: float = INITIAL_STEP_NS,
) -> np.ndarray:
    """Cumulative propagators U(t, 0) at each of the sorted record times"""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DomainError("need at least one record time")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise DomainError("record times must be non-negative and sorted")
    ham = PairHamiltonian(pair, pulse)
    dt = initial_step
    current = _propagate(ham, times, dt)
    while True:
        dt /= 2.0
        if dt < MIN_STEP_NS:
            raise StepSizeUnderflow(
                f"step fell below {MIN_STEP_NS} ns before reaching tolerance {tol:g}"
            )
        refined = _propagate(ham, times, dt)
        change = float(np.max(np.linalg.norm(refined - current, ord=2, axis=(1, 2))))
        logger.debug("dt=%.3g ns change=%.3g", dt, change)
        if change < tol:
            return refined
        current = refined


def evolve_unitary(
    pair: PairSystem,
    pulse: FluxPulse,
    tol: float = PROPAGATOR_TOLERANCE,
) -> np.ndarray:
    """Time-ordered propagator of the pair over the full pulse"""
    return propagators_at(pair, pulse, [pulse.duration], tol=tol)[0]


def state_population(U: np.ndarray, initial: int, target: int) -> np.ndarray:
    return np.abs(U[..., target, initial]) ** 2


@dataclass
class ChevronMap:
    """Target-state population over a grid of modulation frequency and duration"""

    f_p: np.ndarray  # MHz
    times: np.ndarray  # ns
    population: np.ndarray  # shape (len(f_p), len(times))
    initial_state: str
    target_state: str
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        f, t = np.meshgrid(self.f_p, self.times, indexing="ij")
        return pd.DataFrame(
            {
                "f_p_MHz": f.ravel(),
                "t_ns": t.ravel(),
                "population": self.population.ravel(),
            }
        )

    def peak(self) -> Dict[str, float]:
        i, j = np.unravel_index(int(np.argmax(self.population)), self.population.shape)
        return {
            "f_p_MHz": float(self.f_p[i]),
            "t_ns": float(self.times[j]),
            "population": float(self.population[i, j]),
        }


def chevron_scan(
    pair: PairSystem,
    f_p_range: Sequence[float],
    t_range: Sequence[float],
    initial_state: str = "01",
    template: Optional[FluxPulse] = None,
    target_state: Optional[str] = None,
    tol: float = CHEVRON_TOLERANCE,
    workers: Optional[int] = None,
) -> ChevronMap:
    """Population map over (f_p, t); rows are evaluated concurrently.

    Rectangular pulses of different lengths share a prefix, so each row is
    one segmented propagation; ramped pulses need one propagation per point.
    """
    f_values = np.asarray(f_p_range, dtype=float)
    times = np.sort(np.asarray(t_range, dtype=float))
    if f_values.size == 0 or times.size == 0:
        raise DomainError("chevron grids must be non-empty")
    if np.any(times <= 0):
        raise DomainError("pulse durations must be positive")
    target_state = target_state or initial_state[::-1]
    a, b = pair.index(initial_state), pair.index(target_state)
    if template is None:
        template = FluxPulse(0.0, 0.25, float(f_values[0]), float(times[-1]))

    def row(f_p: float) -> np.ndarray:
        pulse = replace(template, f_p=float(f_p), duration=float(times[-1]))
        if pulse.envelope is Envelope.RECTANGULAR or pulse.rise_ns == 0:
            return state_population(propagators_at(pair, pulse, times, tol), a, b)
        return np.array(
            [
                state_population(
                    evolve_unitary(pair, pulse.with_duration(t), tol), a, b
                )
                for t in times
            ]
        )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(row, f_values))
    logger.info(
        "chevron %s: %d x %d grid, max population %.3f",
        pair.label,
        f_values.size,
        times.size,
        float(np.max(rows)),
    )
    return ChevronMap(
        f_p=f_values,
        times=times,
        population=np.vstack(rows),
        initial_state=initial_state,
        target_state=target_state,
        metadata={"phi_dc": template.phi_dc, "phi_ac": template.phi_ac, "tol": tol},
    )
