"""
Multi-die device description: qubits, inter-chip pairs and noise parameters.
"""

import json
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import pandas as pd

from ..config import CONTROL_BAND_MHZ, DEFAULT_PHI_AC
from ..datasets import data_path, load_design_targets
from ..errors import SchemaError, UnknownPair, UnphysicalNoise
from ..schema import validate_document
from .transmon import (
    DesignClass,
    QubitKind,
    TransmonSpec,
    spec_from_targets,
    transmon_levels,
)

logger = logging.getLogger(__name__)

DIE_LETTERS = "ABCD"
DEFAULT_DEVICE_FILE = "device_default.json"


@dataclass(frozen=True)
class QubitNoise:
    """Coherence times in microseconds; *_mod values apply under flux modulation"""

    T1_us: float
    T2_us: float
    T1_mod_us: Optional[float] = None
    T2_mod_us: Optional[float] = None

    def __post_init__(self) -> None:
        for T1, T2, tag in [
            (self.T1_us, self.T2_us, "static"),
            (self.modulated[0], self.modulated[1], "modulated"),
        ]:
            if T1 <= 0 or T2 <= 0:
                raise UnphysicalNoise(f"{tag} coherence times must be positive")
            if T2 > 2.0 * T1 * (1.0 + 1e-12):
                raise UnphysicalNoise(
                    f"{tag} T2={T2} us exceeds 2*T1={2.0 * T1} us "
                    "(negative pure dephasing)"
                )

    @property
    def modulated(self) -> Tuple[float, float]:
        T1 = self.T1_mod_us if self.T1_mod_us is not None else self.T1_us
        T2 = self.T2_mod_us if self.T2_mod_us is not None else self.T2_us
        return T1, T2

    def times(self, modulated: bool) -> Tuple[float, float]:
        return self.modulated if modulated else (self.T1_us, self.T2_us)


@dataclass(frozen=True)
class QubitRecord:
    spec: TransmonSpec
    noise: QubitNoise
    readout_error: float = 0.0

    @property
    def label(self) -> str:
        return self.spec.label


@dataclass(frozen=True)
class PairRecord:
    """Inter-chip pair; qubits keep the order used in the pair label"""

    qubits: Tuple[str, str]
    fixed: str
    tunable: str
    g_MHz: float
    bump_height_um: Optional[float] = None
    phi_ac: float = DEFAULT_PHI_AC

    @property
    def label(self) -> str:
        return f"{self.qubits[0]}-{self.qubits[1]}"


@dataclass(frozen=True)
class Die:
    letter: str
    qubits: Tuple[QubitRecord, ...]


@dataclass(frozen=True)
class DeviceTopology:
    """Four dies of eight transmons joined by inter-chip couplers"""

    dies: Tuple[Die, ...]
    pairs: Tuple[PairRecord, ...]
    name: str = ""
    control_band_MHz: Tuple[float, float] = CONTROL_BAND_MHZ
    coupling_fit: Tuple[float, float] = (27.9, 0.7)
    _index: Dict[str, QubitRecord] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        index = {q.label: q for die in self.dies for q in die.qubits}
        object.__setattr__(self, "_index", index)
        used: Dict[str, str] = {}
        for pair in self.pairs:
            a, b = pair.qubits
            for label in (a, b):
                if label not in index:
                    raise SchemaError(
                        f"pair {pair.label} references unknown qubit {label}"
                    )
                if label in used:
                    raise SchemaError(
                        f"qubit {label} appears in pairs {used[label]} and {pair.label}"
                    )
                used[label] = pair.label
            gap = abs(DIE_LETTERS.index(a[0]) - DIE_LETTERS.index(b[0]))
            if gap != 1:
                raise SchemaError(f"pair {pair.label} must join adjacent dies")
            kinds = {index[a].spec.kind, index[b].spec.kind}
            if kinds != {QubitKind.FIXED, QubitKind.TUNABLE}:
                raise SchemaError(
                    f"pair {pair.label} must join one fixed and one tunable qubit"
                )

    @property
    def qubits(self) -> Dict[str, QubitRecord]:
        return dict(self._index)

    def qubit(self, label: str) -> QubitRecord:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownPair(f"unknown qubit {label}") from None

    def pair(self, label: str) -> PairRecord:
        """Look up a pair by label in either qubit order"""
        parts = tuple(label.split("-"))
        for pair in self.pairs:
            if parts in (pair.qubits, pair.qubits[::-1]):
                return pair
        raise UnknownPair(f"pair {label} is not part of the device topology")

    def with_pair(self, label: str, **changes: Any) -> "DeviceTopology":
        target = self.pair(label)
        pairs = tuple(replace(p, **changes) if p is target else p for p in self.pairs)
        return replace(self, pairs=pairs)

    def with_qubit(self, label: str, **changes: Any) -> "DeviceTopology":
        self.qubit(label)
        dies = tuple(
            Die(
                die.letter,
                tuple(
                    replace(q, **changes) if q.label == label else q
                    for q in die.qubits
                ),
            )
            for die in self.dies
        )
        return replace(self, dies=dies)

    def with_readout_error(self, epsilon: float) -> "DeviceTopology":
        dies = tuple(
            Die(
                die.letter,
                tuple(replace(q, readout_error=epsilon) for q in die.qubits),
            )
            for die in self.dies
        )
        return replace(self, dies=dies)

    def design_table(self) -> pd.DataFrame:
        """Per-qubit Hamiltonian parameters as designed"""
        rows: List[Dict[str, Any]] = []
        for die in self.dies:
            for q in die.qubits:
                spec = q.spec
                top = transmon_levels(spec, 0.0)
                bottom = transmon_levels(spec, 0.5) if spec.tunable else top
                rows.append(
                    {
                        "label": spec.label,
                        "die": die.letter,
                        "design_class": (
                            spec.design_class.value if spec.design_class else ""
                        ),
                        "kind": spec.kind.value,
                        "E_J_sum_GHz": spec.E_J_sum,
                        "E_C_GHz": spec.E_C,
                        "d_asym": spec.d_asym,
                        "f01_max_MHz": top.f01,
                        "f01_min_MHz": bottom.f01,
                        "eta_MHz": top.eta,
                        "T1_us": q.noise.T1_us,
                        "T2_us": q.noise.T2_us,
                        "readout_error": q.readout_error,
                    }
                )
        return pd.DataFrame(rows)


@lru_cache(maxsize=64)
def _solved_spec(
    f01_max: float, f01_min: float, eta: float, kind: QubitKind
) -> TransmonSpec:
    return spec_from_targets(f01_max, f01_min, eta, kind=kind)


def _class_targets() -> Dict[str, Tuple[float, float, float]]:
    table = load_design_targets()
    return {
        row.design_class: (
            float(row.f01_max_MHz),
            float(row.f01_min_MHz),
            float(row.eta_MHz),
        )
        for row in table.itertuples()
    }


def _qubit_from_dict(
    data: Dict[str, Any], targets: Dict[str, Tuple[float, float, float]]
) -> QubitRecord:
    label = data["label"]
    kind = QubitKind(data["kind"])
    design_class = DesignClass(data["design_class"]) if "design_class" in data else None
    if "energies" in data:
        energies = data["energies"]
        spec = TransmonSpec(
            kind=kind,
            E_J_sum=energies["E_J_sum_GHz"],
            E_C=energies["E_C_GHz"],
            d_asym=energies.get("d_asym", 0.0) if kind is QubitKind.TUNABLE else 0.0,
            label=label,
            design_class=design_class,
        )
    else:
        if "targets" in data:
            t = data["targets"]
            f_max, f_min, eta = t["f01_max_MHz"], t["f01_min_MHz"], t["eta_MHz"]
        elif design_class is not None:
            f_max, f_min, eta = targets[design_class.value]
        else:
            raise SchemaError(
                "qubit needs targets, energies or design_class", path=label
            )
        solved = _solved_spec(float(f_max), float(f_min), float(eta), kind)
        spec = replace(solved, label=label, design_class=design_class)
    noise = QubitNoise(
        T1_us=data["T1_us"],
        T2_us=data["T2_us"],
        T1_mod_us=data.get("T1_mod_us"),
        T2_mod_us=data.get("T2_mod_us"),
    )
    readout_error = data.get("readout_error", 0.0)
    return QubitRecord(spec=spec, noise=noise, readout_error=readout_error)


def topology_from_dict(document: Dict[str, Any]) -> DeviceTopology:
    """Validate and build a topology from a parsed device description"""
    validate_document(document, "device.schema.json")
    targets = _class_targets()
    fit = document.get("coupling_fit", {"a_MHz_um": 27.9, "b_MHz": 0.7})
    a, b = float(fit["a_MHz_um"]), float(fit["b_MHz"])

    dies = []
    for die_data in document["dies"]:
        qubits = tuple(_qubit_from_dict(q, targets) for q in die_data["qubits"])
        for q in qubits:
            if q.label[0] != die_data["letter"]:
                raise SchemaError(f"qubit {q.label} listed on die {die_data['letter']}")
        dies.append(Die(letter=die_data["letter"], qubits=qubits))
    if sorted(d.letter for d in dies) != list(DIE_LETTERS):
        raise SchemaError("dies must be lettered A-D", path="dies")

    index = {q.label: q for die in dies for q in die.qubits}
    pairs = []
    for i, pair_data in enumerate(document["pairs"]):
        first, second = pair_data["qubits"]
        if first not in index or second not in index:
            raise SchemaError(
                f"unknown qubit in pair {first}-{second}", path=f"pairs/{i}"
            )
        if "g_MHz" in pair_data:
            g = float(pair_data["g_MHz"])
        else:
            g = a / float(pair_data["bump_height_um"]) + b
        tunable = first if index[first].spec.tunable else second
        fixed = second if tunable == first else first
        pairs.append(
            PairRecord(
                qubits=(first, second),
                fixed=fixed,
                tunable=tunable,
                g_MHz=g,
                bump_height_um=pair_data.get("bump_height_um"),
                phi_ac=pair_data.get("phi_ac_phi0", DEFAULT_PHI_AC),
            )
        )
    band = document.get("control_band_MHz", list(CONTROL_BAND_MHZ))
    topology = DeviceTopology(
        dies=tuple(dies),
        pairs=tuple(pairs),
        name=document.get("name", ""),
        control_band_MHz=(float(band[0]), float(band[1])),
        coupling_fit=(a, b),
    )
    logger.info("loaded device %r with %d pairs", topology.name, len(topology.pairs))
    return topology


def load_topology(path: Union[str, Path]) -> DeviceTopology:
    """Load a device description file"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"device description not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e}", path=str(path)) from e
    return topology_from_dict(document)


def default_topology() -> DeviceTopology:
    """The bundled as-designed four-die device"""
    return load_topology(data_path(DEFAULT_DEVICE_FILE))
