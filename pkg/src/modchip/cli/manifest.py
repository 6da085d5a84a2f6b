"""
Artifact writing and the run manifest.

CSV files are written with a header row, "\n" line endings and a fixed float
format; JSON files with sorted keys. The manifest lists every artifact with
its SHA-256 and is written last.
"""

import hashlib
import json
import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
CSV_FLOAT_FORMAT = "%.10g"


def jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    return value


def dumps(document: Any) -> str:
    text = json.dumps(jsonable(document), sort_keys=True, indent=2, ensure_ascii=False)
    return text + "\n"


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


@dataclass
class ArtifactWriter:
    """Writes artifacts into one run directory and remembers their hashes"""

    directory: Path
    artifacts: Dict[str, str] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def _record(self, name: str) -> Path:
        path = self.directory / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        with self._lock:
            path = self._record(name)
            frame.to_csv(
                path, index=False, lineterminator="\n", float_format=CSV_FLOAT_FORMAT
            )
            self.artifacts[name] = sha256_file(path)
        logger.debug("wrote %s (%d rows)", path, len(frame))
        return path

    def write_json(self, name: str, document: Any) -> Path:
        with self._lock:
            path = self._record(name)
            path.write_text(dumps(document), encoding="utf-8")
            self.artifacts[name] = sha256_file(path)
        logger.debug("wrote %s", path)
        return path


@dataclass
class RunManifest:
    scenario: Dict[str, Any]
    artifacts: Dict[str, str]
    version: str
    duration_s: float
    summary: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "artifacts": [
                {"path": name, "sha256": digest}
                for name, digest in sorted(self.artifacts.items())
            ],
            "version": self.version,
            "duration_s": self.duration_s,
            "summary": self.summary,
        }

    def write(self, directory: Path) -> Path:
        path = directory / MANIFEST_NAME
        path.write_text(dumps(self.to_dict()), encoding="utf-8")
        return path


def verify_manifest(directory: Union[str, Path]) -> List[str]:
    """Artifacts that are missing or whose hash changed"""
    directory = Path(directory)
    document = json.loads((directory / MANIFEST_NAME).read_text(encoding="utf-8"))
    problems = []
    for entry in document["artifacts"]:
        path = directory / entry["path"]
        if not path.is_file():
            problems.append(f"{entry['path']}: missing")
        elif sha256_file(path) != entry["sha256"]:
            problems.append(f"{entry['path']}: hash mismatch")
    return problems
