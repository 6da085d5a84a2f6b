"""
modchip: modular multi-die transmon device simulator

Models a flip-chip assembly of four transmon dies joined by inter-chip
couplers: transmon spectra and couplings, parametric gate dynamics,
calibration on a virtual device, randomized benchmarking and a
simultaneous multi-pair Bell test.
"""

__version__ = "0.1.0"

from .device.topology import DeviceTopology, default_topology, load_topology
from .device.transmon import TransmonSpec, spec_from_targets, transmon_levels
from .coupling.dispersive import chi_qq_model, g_from_chi
from .coupling.geometry import fit_g_vs_height, g_from_height
from .dynamics.gates import simulate_gate
from .dynamics.lindblad import coherence_limited_fidelity
from .dynamics.pulses import FluxPulse
from .dynamics.sidebands import GateType
from .calibration.device import SimulatedDevice, VirtualDevice
from .errors import ModchipError

__all__ = [
    "DeviceTopology",
    "default_topology",
    "load_topology",
    "TransmonSpec",
    "spec_from_targets",
    "transmon_levels",
    "chi_qq_model",
    "g_from_chi",
    "fit_g_vs_height",
    "g_from_height",
    "simulate_gate",
    "coherence_limited_fidelity",
    "FluxPulse",
    "GateType",
    "SimulatedDevice",
    "VirtualDevice",
    "ModchipError",
]
