"""
Tests for gate metrics and dissipative evolution
"""

import numpy as np
import pytest

from modchip.datasets import load_gate_performance
from modchip.device.topology import QubitNoise
from modchip.dynamics.fidelity import (
    CZ,
    IDENTITY,
    ISWAP,
    ProcessMap,
    apply_z_correction,
    average_gate_fidelity,
    conditional_phase,
    leakage,
    optimize_z_phases,
    process_fidelity,
    z_correction,
)
from modchip.dynamics.lindblad import (
    coherence_limited_fidelity,
    dissipator,
    evolve_lindblad,
    idle_process,
    jump_operators,
)
from modchip.dynamics.propagate import evolve_unitary
from modchip.dynamics.pulses import Envelope, FluxPulse
from modchip.dynamics.system import NoiseSpec, pair_system
from modchip.errors import DimensionMismatch, DomainError

# quoted limits for these pairs include two-level-system dephasing beyond T1 and T2
TLS_PAIRS = {"A1-B6", "A3-B4", "B2-C5", "C2-D5"}
# short gates that no linear T1/T2 error model brings within 1 pp of the quote
SHORT_GATE_OUTLIERS = {"B0-C7", "B3-C4", "C1-D6"}


def _embed(block: np.ndarray, levels: int = 3) -> np.ndarray:
    U = np.eye(levels**2, dtype=complex)
    idx = [0, 1, levels, levels + 1]
    U[np.ix_(idx, idx)] = block
    return U


def _analytic_limit(noise: NoiseSpec, t_ns: float, exchange: bool = False) -> float:
    rates = []
    for q, modulated in ((noise.fixed, False), (noise.tunable, True)):
        T1, T2 = (1e3 * T for T in q.times(modulated))
        rates.append((1.0 / T1, 1.0 / T2))
    if exchange:
        mean = tuple(np.mean(rates, axis=0))
        rates = [mean, mean]
    F_pro = 1.0
    for g1, g2 in rates:
        F_pro *= (1.0 + np.exp(-t_ns * g1) + 2.0 * np.exp(-t_ns * g2)) / 4.0
    return (4.0 * F_pro + 1.0) / 5.0


def test_ideal_gates():
    """Test fidelities between ideal targets"""
    assert process_fidelity(CZ, CZ) == pytest.approx(1.0)
    assert average_gate_fidelity(_embed(ISWAP), ISWAP) == pytest.approx(1.0)
    assert process_fidelity(ISWAP, CZ) == pytest.approx(0.0)
    assert average_gate_fidelity(ISWAP, CZ) == pytest.approx(0.2)


def test_unitary_and_process_agree():
    """Test metrics on a unitary and on its superoperator coincide"""
    U = _embed(z_correction(0.4, -1.2) @ CZ)
    process = ProcessMap.from_unitary(U)
    assert process.is_cptp()
    assert process_fidelity(process, CZ) == pytest.approx(process_fidelity(U, CZ))
    assert abs(conditional_phase(process)) == pytest.approx(np.pi)
    assert abs(conditional_phase(U)) == pytest.approx(np.pi)


def test_leakage_counts_lost_population():
    """Test swapping |11> with |02> leaks a quarter of the population"""
    U = np.eye(9, dtype=complex)
    U[[2, 4]] = U[[4, 2]]
    assert leakage(U) == pytest.approx(0.25)
    assert leakage(ProcessMap.from_unitary(U)) == pytest.approx(0.25)
    assert leakage(_embed(CZ)) == pytest.approx(0.0)


def test_average_fidelity_leaves_leakage_separate():
    """Test a leaking unitary keeps the +1 term of the average fidelity"""
    U = np.eye(9, dtype=complex)
    U[[2, 4]] = U[[4, 2]]
    # three of four computational states survive: F_pro = (3/4)^2
    assert process_fidelity(U, IDENTITY) == pytest.approx(0.5625)
    assert average_gate_fidelity(U, IDENTITY) == pytest.approx(0.65)
    assert average_gate_fidelity(
        ProcessMap.from_unitary(U), IDENTITY
    ) == pytest.approx(0.65)
    assert leakage(U) == pytest.approx(0.25)


def test_z_phase_optimization_recovers_local_phases():
    """Test optimal single-qubit phases undo a local Z rotation"""
    U = z_correction(-0.3, -1.1) @ CZ
    a, b = optimize_z_phases(U, CZ)
    corrected = apply_z_correction(U, a, b)
    assert process_fidelity(corrected, CZ) == pytest.approx(1.0, abs=1e-8)


def test_dimension_checks():
    """Test wrong target and operator shapes"""
    with pytest.raises(DimensionMismatch):
        process_fidelity(CZ, np.eye(3))
    with pytest.raises(DimensionMismatch):
        process_fidelity(np.eye(5), CZ)
    with pytest.raises(DimensionMismatch):
        ProcessMap(np.eye(9), 2)


def test_jump_operators():
    """Test two relaxation steps and one dephasing operator per transmon"""
    noise = NoiseSpec()
    fixed, tunable = noise.rates(modulated=False)
    assert len(jump_operators(3, fixed, tunable)) == 6
    assert jump_operators(3, (0.0, 0.0), (0.0, 0.0)) == []


def test_idle_process_is_cptp():
    """Test decoherence maps are completely positive and trace preserving"""
    noise = NoiseSpec.from_modulated(1.52, 2.75)
    process = idle_process(noise, 284.0)
    assert process.is_cptp(tol=1e-9)
    assert process.trace_defect() < 1e-9

    noiseless = idle_process(NoiseSpec.noiseless(), 100.0)
    np.testing.assert_allclose(noiseless.superop, np.eye(81), atol=1e-12)
    with pytest.raises(DomainError):
        idle_process(noise, 0.0)


def test_dissipator_annihilates_ground_state():
    """Test |00><00| is stationary"""
    noise = NoiseSpec()
    fixed, tunable = noise.rates(modulated=False)
    rho = np.zeros((9, 9))
    rho[0, 0] = 1.0
    np.testing.assert_allclose(dissipator(3, fixed, tunable) @ rho.ravel(), 0.0)


@pytest.mark.parametrize("exchange", [False, True])
@pytest.mark.parametrize("t_ns", [50.0, 150.0, 400.0])
def test_coherence_limit_matches_closed_form(t_ns, exchange):
    """Test the Lindblad limit against the product of single-qubit channels"""
    noise = NoiseSpec.from_modulated(14.51, 2.52)
    assert coherence_limited_fidelity(
        noise, t_ns, exchange=exchange
    ) == pytest.approx(_analytic_limit(noise, t_ns, exchange), abs=1e-9)


def test_exchange_averaging_is_second_order():
    """Test sharing the rates moves even the longest gate by a fraction of a percent"""
    noise = NoiseSpec.from_modulated(7.49, 1.93)
    shared = coherence_limited_fidelity(noise, 468.0)
    own = coherence_limited_fidelity(noise, 468.0, exchange=False)
    assert shared < own
    assert own - shared < 2.5e-3


@pytest.mark.parametrize("row", load_gate_performance().to_dict("records"))
def test_coherence_limit_against_calibrated_pairs(row):
    """Test coherence limits using modulated coherence and 73/43 us fixed qubits"""
    noise = NoiseSpec(
        fixed=QubitNoise(73.0, 43.0),
        tunable=QubitNoise(18.0, 15.0, row["T1_mod_us"], row["T2_mod_us"]),
    )
    limit = 100.0 * coherence_limited_fidelity(noise, row["t_gate_ns"])
    quoted = row["coherence_limited_pct"]
    if row["pair"] in TLS_PAIRS:
        assert limit - quoted > 3.0
        return
    short = row["t_gate_ns"] <= 160.0 and row["pair"] not in SHORT_GATE_OUTLIERS
    assert limit == pytest.approx(quoted, abs=1.0 if short else 2.0)


def test_noiseless_lindblad_matches_unitary(topology):
    """Test the splitting reduces to the unitary propagator without noise"""
    pair = pair_system(topology, "C1-D6")
    pulse = FluxPulse(0.0, 0.25, 400.0, duration=20.0, envelope=Envelope.RECTANGULAR)
    process = evolve_lindblad(pair, pulse, NoiseSpec.noiseless())
    expected = ProcessMap.from_unitary(evolve_unitary(pair, pulse))
    np.testing.assert_allclose(process.superop, expected.superop, atol=1e-6)


def test_lindblad_process_is_cptp(topology):
    """Test a modulated pulse with decoherence gives a physical map"""
    pair = pair_system(topology, "C1-D6")
    pulse = FluxPulse(0.0, 0.25, 400.0, duration=20.0)
    process = evolve_lindblad(pair, pulse, NoiseSpec.from_modulated(14.51, 2.52))
    assert process.is_cptp(tol=1e-9)

    rho = np.zeros((9, 9), dtype=complex)
    rho[1, 1] = 1.0
    out = evolve_lindblad(
        pair, pulse, NoiseSpec.from_modulated(14.51, 2.52), initial=rho
    )
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-9)
    assert average_gate_fidelity(process, IDENTITY) < 1.0
