"""
Bell-state preparation circuits on inter-chip pairs.

The CNOT is compiled to the native CZ as H(target) CZ H(target). The ZZ
basis measures directly; the XX basis adds a Hadamard on both qubits.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from ..calibration.programs import Circuit, circuit_unitary
from ..device.topology import DeviceTopology
from ..dynamics.sidebands import GateType

BELL_STATE = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2)


class BellBasis(Enum):
    ZZ = "ZZ"
    XX = "XX"


@dataclass
class BellCircuit:
    pair: str
    basis: BellBasis
    control: str
    target: str
    circuit: Circuit

    @property
    def qubits(self) -> Tuple[str, str]:
        return (self.control, self.target)

    def unitary(self) -> np.ndarray:
        """Ideal unitary in (control, target) order"""
        return circuit_unitary(self.circuit)


def build_bell_circuit(
    topology: DeviceTopology,
    pair: str,
    basis: BellBasis = BellBasis.ZZ,
    gate: GateType = GateType.CZ02,
) -> BellCircuit:
    """Prepare (|00> + |11>)/sqrt(2) on a pair, optionally rotated to the X basis

    The control is the first qubit of the pair label.
    """
    record = topology.pair(pair)
    control, target = record.qubits
    circuit = Circuit((control, target))
    circuit.h(control).h(target)
    circuit.native(record.label, gate, (record.fixed, record.tunable))
    circuit.h(target)
    if basis is BellBasis.XX:
        circuit.h(control).h(target)
    return BellCircuit(record.label, basis, control, target, circuit)
