"""
Two coupled transmons and their noise parameters.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from ..config import (
    FIXED_T1_US,
    FIXED_T2_US,
    LEVELS_PER_TRANSMON,
    TUNABLE_T1_US,
    TUNABLE_T2_US,
)
from ..device.topology import DeviceTopology, QubitNoise
from ..device.transmon import TransmonSpec
from ..errors import DomainError


class Frame(Enum):
    LAB = "lab"
    DOUBLY_ROTATING = "doubly_rotating"


@dataclass(frozen=True)
class PairSystem:
    """Fixed and tunable transmon truncated to `levels` each, coupled with g (MHz).

    Basis states are |F T> with index F*levels + T.
    """

    fixed: TransmonSpec
    tunable: TransmonSpec
    g: float
    levels: int = LEVELS_PER_TRANSMON
    frame: Frame = Frame.DOUBLY_ROTATING
    counter_rotating: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        if self.levels < 3:
            raise DomainError("at least three levels per transmon are required")
        if self.g < 0:
            raise DomainError("coupling must be non-negative")

    @property
    def dim(self) -> int:
        return self.levels**2

    def index(self, state: str) -> int:
        """Basis index of a two-digit label such as "01" (fixed level, tunable level)"""
        if len(state) != 2 or not state.isdigit():
            raise DomainError(f"state label must be two digits, got {state!r}")
        f, t = int(state[0]), int(state[1])
        if max(f, t) >= self.levels:
            raise DomainError(f"state {state} outside the truncated space")
        return f * self.levels + t

    @property
    def computational_indices(self) -> Tuple[int, int, int, int]:
        L = self.levels
        return (0, 1, L, L + 1)


@dataclass(frozen=True)
class NoiseSpec:
    """Per-qubit coherence of a pair; T~ values apply to a modulated tunable qubit"""

    fixed: QubitNoise = field(
        default_factory=lambda: QubitNoise(FIXED_T1_US, FIXED_T2_US)
    )
    tunable: QubitNoise = field(
        default_factory=lambda: QubitNoise(TUNABLE_T1_US, TUNABLE_T2_US)
    )

    @classmethod
    def from_modulated(
        cls,
        T1_mod_us: float,
        T2_mod_us: float,
        fixed: Optional[QubitNoise] = None,
    ) -> "NoiseSpec":
        tunable = QubitNoise(TUNABLE_T1_US, TUNABLE_T2_US, T1_mod_us, T2_mod_us)
        return cls(fixed=fixed or QubitNoise(FIXED_T1_US, FIXED_T2_US), tunable=tunable)

    @classmethod
    def noiseless(cls) -> "NoiseSpec":
        inf = float("inf")
        return cls(QubitNoise(inf, inf), QubitNoise(inf, inf))

    def rates(self, modulated: bool) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        """((gamma1, gamma_phi) fixed, (gamma1, gamma_phi) tunable) in 1/ns"""
        out = []
        for noise, mod in ((self.fixed, False), (self.tunable, modulated)):
            T1, T2 = noise.times(mod)
            gamma1 = 1.0 / (T1 * 1e3)
            gamma_phi = 1.0 / (T2 * 1e3) - gamma1 / 2.0
            out.append((gamma1, max(gamma_phi, 0.0)))
        return out[0], out[1]


def pair_system(
    topology: DeviceTopology,
    pair_label: str,
    levels: int = LEVELS_PER_TRANSMON,
    frame: Frame = Frame.DOUBLY_ROTATING,
) -> PairSystem:
    pair = topology.pair(pair_label)
    return PairSystem(
        fixed=topology.qubit(pair.fixed).spec,
        tunable=topology.qubit(pair.tunable).spec,
        g=pair.g_MHz,
        levels=levels,
        frame=frame,
        label=pair.label,
    )


def pair_noise(topology: DeviceTopology, pair_label: str) -> NoiseSpec:
    pair = topology.pair(pair_label)
    return NoiseSpec(
        fixed=topology.qubit(pair.fixed).noise,
        tunable=topology.qubit(pair.tunable).noise,
    )
