"""
Hierarchical seeds: one root seed per scenario, one child per task path.

A task path is a tuple of labels such as ("rb", "C1-D6", "reference"). Each
label is hashed to a 32-bit word of the spawn key, so a task's stream does
not depend on which other tasks ran or in what order.
"""

import hashlib
from typing import Tuple

import numpy as np


def label_word(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def spawn_key(*labels: str) -> Tuple[int, ...]:
    return tuple(label_word(str(label)) for label in labels)


def task_seed(root: int, *labels: str) -> np.random.SeedSequence:
    """Seed for the task at the given label path below the root seed"""
    return np.random.SeedSequence(root, spawn_key=spawn_key(*labels))
