"""
Which benchmark estimate gets quoted for a gate.

Interleaved RB isolates the gate, but its systematic error is bounded by the
reference decay, so it is only quoted while reference fidelity is high.
"""

from dataclasses import dataclass
from typing import Dict, Union

from ..config import IRB_QUOTE_THRESHOLD

IRB_FLAG = "iRB"
BELOW_THRESHOLD_FLAG = "RB, below iRB threshold"


@dataclass(frozen=True)
class QuotedFidelity:
    value: float
    flag: str
    F_RB: float
    F_iRB: float

    def to_dict(self) -> Dict[str, Union[float, str]]:
        return {
            "quoted": self.value,
            "flag": self.flag,
            "F_RB": self.F_RB,
            "F_iRB": self.F_iRB,
        }


def quote_policy(
    F_RB: float, F_iRB: float, threshold: float = IRB_QUOTE_THRESHOLD
) -> QuotedFidelity:
    """Quote iRB when F_RB >= threshold (inclusive), otherwise RB"""
    if F_RB >= threshold:
        return QuotedFidelity(F_iRB, IRB_FLAG, F_RB, F_iRB)
    return QuotedFidelity(F_RB, BELOW_THRESHOLD_FLAG, F_RB, F_iRB)
