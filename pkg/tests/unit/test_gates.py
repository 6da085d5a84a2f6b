"""
Tests for gate design and simulation
"""

import numpy as np
import pytest

from modchip.datasets import load_gate_performance
from modchip.dynamics.gates import (
    coherent_error,
    design_gate_pulse,
    phi_ac_for_gate_time,
    predicted_gate_time,
    simulate_gate,
)
from modchip.dynamics.pulses import Envelope
from modchip.dynamics.sidebands import GateType
from modchip.dynamics.system import NoiseSpec, pair_system
from modchip.errors import NoSolution


@pytest.fixture
def c1_d6(topology):
    return pair_system(topology, "C1-D6")


@pytest.mark.parametrize("gate", list(GateType))
def test_predicted_gate_lies_in_control_band(c1_d6, gate):
    """Test second-sideband gates on C1-D6 fall inside 100-1000 MHz"""
    f_p, t_gate = predicted_gate_time(c1_d6, gate, phi_ac=0.25)
    assert 100.0 < f_p < 1000.0
    assert 10.0 < t_gate < 1000.0


def test_design_gate_pulse_adds_ramp(c1_d6):
    """Test the designed duration is the flat top plus one rise time"""
    _, t_flat = predicted_gate_time(c1_d6, GateType.ISWAP, phi_ac=0.25)
    ramped = design_gate_pulse(c1_d6, GateType.ISWAP, rise_ns=8.0)
    flat = design_gate_pulse(c1_d6, GateType.ISWAP, envelope=Envelope.RECTANGULAR)
    assert ramped.duration == pytest.approx(t_flat + 8.0)
    assert flat.duration == pytest.approx(t_flat)
    assert ramped.f_p == pytest.approx(flat.f_p)


def test_phi_ac_for_gate_time_inverts_prediction(c1_d6):
    """Test the amplitude search recovers the amplitude behind a gate time"""
    _, t_gate = predicted_gate_time(c1_d6, GateType.ISWAP, phi_ac=0.2)
    assert phi_ac_for_gate_time(c1_d6, GateType.ISWAP, t_gate) == pytest.approx(
        0.2, abs=1e-4
    )
    with pytest.raises(NoSolution):
        phi_ac_for_gate_time(c1_d6, GateType.ISWAP, 1.0)


@pytest.mark.slow
def test_designed_iswap_is_accurate(c1_d6):
    """Test the sideband-designed iSWAP reaches high fidelity without noise"""
    pulse = design_gate_pulse(c1_d6, GateType.ISWAP, envelope=Envelope.RECTANGULAR)
    result = simulate_gate(c1_d6, pulse, GateType.ISWAP)

    assert result.avg_fidelity > 0.9
    assert result.leakage < 1e-2
    assert result.unitary is not None
    np.testing.assert_allclose(
        result.propagator @ result.propagator.conj().T, np.eye(9), atol=1e-9
    )
    summary = result.summary()
    assert summary["gate"] == "iSWAP"
    assert summary["t_gate_ns"] == pytest.approx(pulse.duration)
    assert coherent_error(c1_d6, pulse, GateType.ISWAP) == pytest.approx(result.error)


@pytest.mark.slow
def test_decoherence_lowers_gate_fidelity(c1_d6):
    """Test the C1-D6 gate with its modulated coherence"""
    row = load_gate_performance().set_index("pair").loc["C1-D6"]
    noise = NoiseSpec.from_modulated(row["T1_mod_us"], row["T2_mod_us"])
    pulse = design_gate_pulse(c1_d6, GateType.ISWAP, envelope=Envelope.RECTANGULAR)

    ideal = simulate_gate(c1_d6, pulse, GateType.ISWAP)
    noisy = simulate_gate(c1_d6, pulse, GateType.ISWAP, noise=noise)
    assert noisy.unitary is None
    assert noisy.propagator.is_cptp(tol=1e-9)
    assert noisy.avg_fidelity < ideal.avg_fidelity
    assert noisy.avg_fidelity > 0.85
