"""
Scenario files: which command to run, on which device, with which knobs.

Scenarios are JSON (YAML is accepted for hand-written files) validated
against the bundled scenario schema. Every numeric parameter names its unit
in its key; plain counts and probabilities are listed in DIMENSIONLESS_KEYS.
"""

import copy
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from ..calibration.device import DeviceNoise, NativeMode, SimulatedDevice
from ..device.topology import (
    DeviceTopology,
    QubitNoise,
    default_topology,
    load_topology,
)
from ..errors import SchemaError, UnitError
from ..schema import validate_document

logger = logging.getLogger(__name__)

SCENARIO_SCHEMA = "scenario.schema.json"
SCENARIO_DIRS = (Path("config") / "scenarios",)

UNIT_SUFFIXES = ("_MHz", "_GHz", "_us", "_ns", "_um", "_phi0", "_uev", "_ohm", "_s")
DIMENSIONLESS_KEYS = frozenset(
    {
        "shots",
        "n_runs",
        "n_seq",
        "n_points",
        "lengths",
        "points",
        "f_points",
        "t_points",
        "bins",
        "workers",
        "order",
        "levels",
        "slots",
        "candidate_dies",
        "native_depolarizing",
        "clifford_depolarizing",
        "readout_error",
        "tolerance",
        "schema_version",
        "seed",
    }
)


class Command(Enum):
    DEVICE_VALIDATE = "device-validate"
    CHEVRON = "chevron"
    CALIBRATE = "calibrate"
    CHI = "chi"
    RB = "rb"
    IRB = "irb"
    BELL = "bell"
    COUPLING_SWEEP = "coupling-sweep"
    COHERENCE_LIMIT = "coherence-limit"
    REPORT = "report"


def check_units(value: Any, path: str = "") -> None:
    """Raise UnitError for a numeric value under a key without a unit suffix"""
    key = path.rsplit("/", 1)[-1]
    if key in DIMENSIONLESS_KEYS or key.endswith(UNIT_SUFFIXES):
        return
    if isinstance(value, dict):
        for k, v in value.items():
            check_units(v, f"{path}/{k}" if path else str(k))
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)):
                check_units(v, path)
            elif _is_number(v):
                raise UnitError(f"{path}: numeric values need a unit suffix in the key")
    elif _is_number(value):
        raise UnitError(f"{path}: numeric values need a unit suffix in the key")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass
class Scenario:
    command: Command
    seed: int = 0
    params: Dict[str, Any] = field(default_factory=dict)
    device: Optional[Path] = None
    output: Optional[Path] = None
    coherence: Dict[str, Dict[str, float]] = field(default_factory=dict)
    pairs: Dict[str, Dict[str, float]] = field(default_factory=dict)
    device_noise: Dict[str, Any] = field(default_factory=dict)
    source: Optional[Path] = None
    _topology: Optional[DeviceTopology] = field(default=None, repr=False, compare=False)

    def param(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)

    def resolve(self, path: Union[str, Path]) -> Path:
        """Paths in a scenario are relative to the scenario file"""
        path = Path(path)
        if path.is_absolute() or self.source is None:
            return path
        return self.source.parent / path

    def topology(self) -> DeviceTopology:
        if self._topology is None:
            self._topology = self._build_topology()
        return self._topology

    def _build_topology(self) -> DeviceTopology:
        if self.device:
            topology = load_topology(self.resolve(self.device))
        else:
            topology = default_topology()
        if "readout_error" in self.device_noise:
            epsilon = float(self.device_noise["readout_error"])
            topology = topology.with_readout_error(epsilon)
        for label, times in self.coherence.items():
            current = topology.qubit(label).noise
            merged = {
                "T1_us": current.T1_us,
                "T2_us": current.T2_us,
                "T1_mod_us": current.T1_mod_us,
                "T2_mod_us": current.T2_mod_us,
            }
            merged.update(times)
            topology = topology.with_qubit(label, noise=QubitNoise(**merged))
        for label, changes in self.pairs.items():
            update: Dict[str, float] = {}
            if "g_MHz" in changes:
                update["g_MHz"] = float(changes["g_MHz"])
            if "phi_ac_phi0" in changes:
                update["phi_ac"] = float(changes["phi_ac_phi0"])
            topology = topology.with_pair(label, **update)
        return topology

    def noise(self) -> DeviceNoise:
        spec = self.device_noise
        schedule = {
            q: [(float(e["at_s"]), float(e["T1_us"])) for e in entries]
            for q, entries in spec.get("T1_schedule", {}).items()
        }
        return DeviceNoise(
            native_depolarizing=dict(spec.get("native_depolarizing", {})),
            clifford_depolarizing=float(spec.get("clifford_depolarizing", 0.0)),
            frequency_offset_MHz=dict(spec.get("frequency_offset_MHz", {})),
            t1_schedule=schedule,
            decoherence=bool(spec.get("decoherence", True)),
            idle_zz=bool(spec.get("idle_zz", True)),
        )

    def build_device(self) -> SimulatedDevice:
        kwargs: Dict[str, Any] = {}
        if "seconds_per_shot_s" in self.device_noise:
            kwargs["seconds_per_shot"] = float(self.device_noise["seconds_per_shot_s"])
        return SimulatedDevice(
            self.topology(),
            noise=self.noise(),
            native_mode=NativeMode(self.device_noise.get("native_mode", "ideal")),
            **kwargs,
        )

    def echo(self) -> Dict[str, Any]:
        """Scenario as plain data, for the run manifest"""
        return {
            "command": self.command.value,
            "seed": self.seed,
            "params": copy.deepcopy(self.params),
            "device": str(self.device) if self.device else None,
            "coherence": copy.deepcopy(self.coherence),
            "pairs": copy.deepcopy(self.pairs),
            "device_noise": copy.deepcopy(self.device_noise),
        }


def find_scenario(path: Union[str, Path]) -> Path:
    path = Path(path)
    searched: List[Path] = [path]
    if not path.is_absolute():
        searched += [d / path for d in SCENARIO_DIRS]
    for candidate in searched:
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(
        "scenario not found; searched " + ", ".join(str(p) for p in searched)
    )


def read_document(path: Path) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        try:
            if path.suffix in (".yaml", ".yml"):
                document = yaml.safe_load(f)
            else:
                document = json.load(f)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise SchemaError(f"cannot parse scenario: {e}", path=str(path)) from e
    if not isinstance(document, dict):
        raise SchemaError("scenario must be a mapping", path=str(path))
    return document


def parse_override(item: str) -> Dict[str, Any]:
    """KEY=VALUE with a YAML-typed value; dotted keys address nested sections"""
    if "=" not in item:
        raise SchemaError(f"override {item!r} is not KEY=VALUE", path="--param")
    key, raw = item.split("=", 1)
    return {key.strip(): yaml.safe_load(raw)}


def apply_overrides(document: Dict[str, Any], overrides: Dict[str, Any]) -> None:
    for key, value in overrides.items():
        if key in ("seed", "output", "device", "command"):
            document[key] = value
            continue
        parts = key.split(".")
        if len(parts) == 1:
            parts = ["params"] + parts
        node = document
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise SchemaError(f"cannot override inside {part}", path=key)
        node[parts[-1]] = value


def load_scenario(
    path: Union[str, Path],
    overrides: Optional[Dict[str, Any]] = None,
    command: Optional[str] = None,
) -> Scenario:
    """Read, override, validate and check units of a scenario file"""
    source = find_scenario(path)
    document = read_document(source)
    apply_overrides(document, overrides or {})
    if command is not None:
        if document.get("command", command) != command:
            raise SchemaError(
                f"scenario is for {document['command']!r}, not {command!r}",
                path="command",
            )
        document["command"] = command
    if "command" not in document:
        raise SchemaError("no command given", path="command")
    validate_document(document, SCENARIO_SCHEMA)
    for section in ("params", "coherence", "pairs", "device_noise"):
        check_units(document.get(section, {}), section)

    scenario = Scenario(
        command=Command(document["command"]),
        seed=int(document.get("seed", 0)),
        params=document.get("params", {}),
        device=Path(document["device"]) if "device" in document else None,
        output=Path(document["output"]) if "output" in document else None,
        coherence=document.get("coherence", {}),
        pairs=document.get("pairs", {}),
        device_noise=document.get("device_noise", {}),
        source=source,
    )
    scenario.topology()
    logger.debug("loaded scenario %s for %s", source, scenario.command.value)
    return scenario
