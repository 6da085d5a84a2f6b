"""
Shared fixtures for the modchip test suite
"""

import copy

import pytest

from modchip.calibration.device import DeviceNoise, SimulatedDevice
from modchip.datasets import load_json
from modchip.device.topology import DEFAULT_DEVICE_FILE, default_topology


@pytest.fixture(scope="session")
def topology():
    """The bundled four-die device"""
    return default_topology()


@pytest.fixture
def device_document():
    """A fresh, editable copy of the bundled device description"""
    return copy.deepcopy(load_json(DEFAULT_DEVICE_FILE))


@pytest.fixture
def clean_device(topology):
    """Ideal gates, no decoherence and no idle ZZ"""
    return SimulatedDevice(topology, DeviceNoise(decoherence=False, idle_zz=False))


@pytest.fixture
def make_device(topology):
    """Factory for simulated devices with custom noise knobs"""

    def build(topo=None, **noise):
        return SimulatedDevice(topo or topology, DeviceNoise(**noise))

    return build
