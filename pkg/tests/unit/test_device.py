"""
Tests for circuits, pulse programs and the simulated device
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from modchip.calibration.device import (
    DeviceNoise,
    NativeMode,
    SimulatedDevice,
    child_seed,
    decoherence_kraus,
    depolarizing_kraus,
    kraus_from_process,
    spawn_seeds,
)
from modchip.calibration.programs import (
    CLIFFORD_MARKER,
    Circuit,
    PulseProgram,
    circuit_unitary,
    population,
    state_population,
)
from modchip.dynamics.fidelity import CZ, ProcessMap
from modchip.dynamics.hamiltonian import static_zz
from modchip.dynamics.pulses import Envelope, FluxPulse
from modchip.dynamics.sidebands import GateType
from modchip.dynamics.system import pair_system
from modchip.errors import DomainError


def _completeness(kraus):
    return sum(K.conj().T @ K for K in kraus)


def _bell_circuit():
    circuit = Circuit(("D6", "C1"))
    circuit.h("D6").h("C1").native("C1-D6", GateType.CZ20, ("D6", "C1")).h("C1")
    return circuit


def test_seed_derivation_is_reproducible():
    """Test spawned and addressed seeds repeat for the same root"""
    first = [s.generate_state(2) for s in spawn_seeds(11, 3)]
    second = [s.generate_state(2) for s in spawn_seeds(11, 3)]
    np.testing.assert_array_equal(first, second)
    assert not np.array_equal(first[0], first[1])

    a = child_seed(11, 0, 4).generate_state(2)
    np.testing.assert_array_equal(a, child_seed(11, 0, 4).generate_state(2))
    assert not np.array_equal(a, child_seed(11, 1, 4).generate_state(2))


@pytest.mark.parametrize("n_qubits", [1, 2])
def test_depolarizing_kraus_is_trace_preserving(n_qubits):
    """Test the Pauli-twirl Kraus set sums to the identity"""
    kraus = depolarizing_kraus(0.3, n_qubits)
    np.testing.assert_allclose(_completeness(kraus), np.eye(2**n_qubits), atol=1e-12)


def test_decoherence_kraus():
    """Test relaxation of |1> and completeness"""
    kraus = decoherence_kraus(10_000.0, T1_us=20.0, T2_us=15.0)
    np.testing.assert_allclose(_completeness(kraus), np.eye(2), atol=1e-12)
    rho = np.diag([0.0, 1.0]).astype(complex)
    out = sum(K @ rho @ K.conj().T for K in kraus)
    assert out[1, 1].real == pytest.approx(np.exp(-0.5))


def test_kraus_from_process_reproduces_the_map():
    """Test the Choi decomposition of a unitary process"""
    process = ProcessMap.from_unitary(CZ)
    kraus = kraus_from_process(process)
    rebuilt = sum(np.kron(K, K.conj()) for K in kraus)
    np.testing.assert_allclose(rebuilt, process.superop, atol=1e-12)


def test_device_noise_validation():
    """Test depolarizing strengths beyond the physical range"""
    with pytest.raises(DomainError):
        DeviceNoise(native_depolarizing={"C1-D6": 1.5})
    with pytest.raises(DomainError):
        DeviceNoise(clifford_depolarizing=-0.1)


def test_circuit_validation():
    """Test duplicate, unknown and mismatched qubits"""
    with pytest.raises(DomainError):
        Circuit(("A0", "A0"))
    circuit = Circuit(("A0",))
    with pytest.raises(DomainError):
        circuit.x("B0")
    with pytest.raises(DomainError):
        circuit.gate("bad", ["A0"], np.eye(4))
    with pytest.raises(DomainError):
        circuit.idle(-1.0)
    with pytest.raises(DomainError):
        PulseProgram("C1-D6", FluxPulse(0.0, 0.25, 500.0, 50.0), (50.0,), "22")


def test_circuit_unitary():
    """Test the ideal unitary of a Bell-state circuit"""
    U = circuit_unitary(_bell_circuit())
    psi = U[:, 0]
    np.testing.assert_allclose(np.abs(psi) ** 2, [0.5, 0.0, 0.0, 0.5], atol=1e-12)
    np.testing.assert_allclose(
        circuit_unitary(Circuit(("A0",)).h("A0").h("A0")), np.eye(2), atol=1e-12
    )


def test_count_helpers():
    """Test marginal and joint populations from counts"""
    counts = {"01": 3, "11": 1}
    assert population(counts, bit=1, position=0) == pytest.approx(0.25)
    assert population(counts, bit=1, position=1) == pytest.approx(1.0)
    assert state_population(counts, "01") == pytest.approx(0.75)
    assert population({}) == 0.0


def test_ideal_bell_state(clean_device):
    """Test an ideal native CZ entangles the pair"""
    counts = clean_device.run(_bell_circuit(), 2000, seed=5)
    assert sum(counts.values()) == 2000
    assert counts.get("01", 0) + counts.get("10", 0) == 0
    assert 800 < counts["00"] < 1200


def test_native_gate_qubit_order(clean_device):
    """Test native gates must list the fixed qubit first"""
    circuit = Circuit(("D6", "C1")).native("C1-D6", GateType.CZ20, ("C1", "D6"))
    with pytest.raises(DomainError):
        clean_device.run(circuit, 10)


def test_execution_is_seeded(make_device):
    """Test equal seeds give equal counts and the clock advances per shot"""
    device = make_device()
    circuit = Circuit(("A0",)).x90("A0")
    first = device.run(circuit, 500, seed=2)
    assert device.run(circuit, 500, seed=2) == first
    assert device.clock == pytest.approx(2 * 500 * device.seconds_per_shot)
    with pytest.raises(DomainError):
        device.run(circuit, 0)


def test_readout_error(make_device, topology):
    """Test a symmetric bit flip on every measured qubit"""
    device = make_device(topology.with_readout_error(0.1), decoherence=False)
    counts = device.run(Circuit(("A0",)), 20_000, seed=1)
    assert population(counts) == pytest.approx(0.1, abs=0.01)


def test_clifford_marker_depolarizes(make_device):
    """Test a fully depolarizing marker randomizes both qubits"""
    device = make_device(clifford_depolarizing=1.0, decoherence=False, idle_zz=False)
    circuit = Circuit(("D6", "C1")).x("D6").marker(CLIFFORD_MARKER)
    counts = device.run(circuit, 20_000, seed=3)
    for state in ("00", "01", "10", "11"):
        assert state_population(counts, state) == pytest.approx(0.25, abs=0.02)


def test_t1_schedule_follows_the_clock(make_device):
    """Test scheduled T1 values switch in at their start time"""
    device = make_device(t1_schedule={"D6": [(0.0, 73.0), (100.0, 20.0)]})
    assert device.coherence("D6") == (73.0, 43.0)
    device.advance(150.0)
    assert device.coherence("D6") == (20.0, 40.0)


def test_idle_zz_uses_exact_shift(clean_device, topology):
    """Test the cached pair ZZ equals the diagonalized value"""
    assert clean_device.zz_shift("D6-C1") == pytest.approx(
        static_zz(pair_system(topology, "C1-D6"))
    )


def test_relaxation_during_idle(make_device):
    """Test an excited qubit decays during a long idle"""
    device = make_device(idle_zz=False)
    circuit = Circuit(("D6",)).x("D6").idle(73_000.0)
    counts = device.run(circuit, 20_000, seed=9)
    assert population(counts) == pytest.approx(np.exp(-1.0), abs=0.015)


def test_pulse_program_returns_one_result_per_duration(clean_device):
    """Test a rectangular pulse program on C1-D6"""
    pulse = FluxPulse(0.0, 0.25, 550.0, 60.0, envelope=Envelope.RECTANGULAR)
    program = PulseProgram("C1-D6", pulse, (20.0, 60.0, 40.0))
    results = clean_device.execute(program, 200, seed=4)
    assert len(results) == 3
    assert all(sum(c.values()) == 200 for c in results)


@pytest.mark.slow
def test_engine_native_iswap(make_device):
    """Test the engine-simulated iSWAP moves |01> to |10>"""
    device = make_device(decoherence=False, idle_zz=False)
    device.native_mode = NativeMode.ENGINE
    circuit = Circuit(("D6", "C1")).x("C1")
    circuit.native("C1-D6", GateType.ISWAP, ("D6", "C1"))
    counts = device.run(circuit, 2000, seed=6)
    assert state_population(counts, "10") > 0.85


def test_engine_mode_constructor(topology):
    """Test a device built directly in engine mode keeps its pulses"""
    pulse = FluxPulse(0.0, 0.25, 550.0, 120.0)
    device = SimulatedDevice(
        topology,
        native_mode=NativeMode.ENGINE,
        gate_pulses={("C1-D6", GateType.ISWAP): pulse},
    )
    assert device.gate_pulse("D6-C1", GateType.ISWAP) is pulse
    replacement = FluxPulse(0.0, 0.2, 500.0, 150.0)
    device.set_gate_pulse("C1-D6", GateType.ISWAP, replacement)
    assert device.gate_pulse("C1-D6", GateType.ISWAP) is replacement


def test_default_gate_pulse_is_designed_once_under_threads(topology):
    """Test concurrent lookups of an uninstalled pulse agree on one instance"""
    device = SimulatedDevice(topology, native_mode=NativeMode.ENGINE)
    with ThreadPoolExecutor(max_workers=4) as pool:
        pulses = list(
            pool.map(lambda _: device.gate_pulse("C1-D6", GateType.ISWAP), range(8))
        )
    assert all(p is pulses[0] for p in pulses)
    assert device.gate_pulse("D6-C1", GateType.ISWAP) is pulses[0]
