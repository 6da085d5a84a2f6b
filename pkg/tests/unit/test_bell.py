"""
Tests for Bell circuits and the simultaneous witness experiment
"""

import numpy as np
import pytest

from modchip.bell.circuits import BELL_STATE, BellBasis, build_bell_circuit
from modchip.bell.witness import (
    SQRT2,
    TSIRELSON_BOUND,
    bounds,
    combine_runs,
    depolarizing_for_witness,
    parity_expectation,
    run_bell_experiment,
    violation_sigma,
    witness_for_depolarizing,
    witness_from_counts,
    witness_histogram,
)
from modchip.config import BELL_PAIRS
from modchip.datasets import load_bell_marginals
from modchip.errors import DomainError, EmptyCounts, NonDisjointPairs


@pytest.mark.parametrize("basis", list(BellBasis))
def test_bell_circuit_prepares_phi_plus(topology, basis):
    """Test both measurement bases see (|00> + |11>)/sqrt(2)"""
    bell = build_bell_circuit(topology, "D6-C1", basis)
    assert bell.pair == "C1-D6"
    assert bell.qubits == ("C1", "D6")
    psi = bell.unitary()[:, 0]
    assert abs(np.vdot(BELL_STATE, psi)) == pytest.approx(1.0)


def test_parity_expectation():
    """Test correlated and anti-correlated counts"""
    value, err = parity_expectation({"00": 50, "11": 50})
    assert value == 1.0
    assert 0.0 < err < 0.02
    assert parity_expectation({"01": 3, "10": 1})[0] == -1.0
    assert parity_expectation({"0011": 10}, positions=(2, 3))[0] == 1.0
    with pytest.raises(EmptyCounts):
        parity_expectation({})


def test_ideal_witness_reaches_tsirelson_bound():
    """Test W = 2 sqrt(2) for perfectly correlated ZZ and XX outcomes"""
    result = witness_from_counts({"00": 60, "11": 40}, {"00": 45, "11": 55}, "X")
    assert result.w == pytest.approx(TSIRELSON_BOUND)
    assert result.shots_per_basis == 100
    assert result.to_dict()["W"] == result.w


def test_combine_runs_uses_run_spread():
    """Test the combined error is the sample deviation of single runs"""
    runs = [
        witness_from_counts({"00": 90, "01": 10}, {"00": 100}, "P"),
        witness_from_counts({"00": 80, "01": 20}, {"00": 100}, "P"),
    ]
    combined = combine_runs("P", runs)
    expected = np.array([SQRT2 * 1.8, SQRT2 * 1.6])
    assert combined.w == pytest.approx(expected.mean())
    assert combined.w_err == pytest.approx(expected.std(ddof=1))
    assert combined.w_sem == pytest.approx(combined.w_err / np.sqrt(2))
    assert combine_runs("P", runs[:1]).w_err == runs[0].w_err
    with pytest.raises(DomainError):
        combine_runs("P", [])


def test_bounds_and_violation():
    """Test classical and quantum bounds scale with the number of pairs"""
    classical, quantum = bounds(3)
    assert classical == 6.0
    assert quantum == pytest.approx(6.0 * SQRT2)
    assert violation_sigma(2.3, 0.1) == pytest.approx(3.0)
    assert violation_sigma(2.3, 0.0) == float("inf")
    assert violation_sigma(1.9, 0.0) == 0.0
    with pytest.raises(DomainError):
        bounds(0)


def test_depolarizing_model():
    """Test the witness of a depolarized pair and its inversion"""
    assert witness_for_depolarizing(0.0) == pytest.approx(TSIRELSON_BOUND)
    w = witness_for_depolarizing(0.2, readout_error=0.02)
    assert depolarizing_for_witness(w, readout_error=0.02) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        depolarizing_for_witness(3.0)


def test_measured_witnesses_violate_classical_bound():
    """Test every tabulated pair exceeds W = 2 and the sum is 6.651"""
    table = load_bell_marginals()
    assert table["W"].sum() == pytest.approx(6.651)
    for row in table.to_dict("records"):
        assert violation_sigma(row["W"], row["W_err"]) > 3.0
        assert 0.0 < depolarizing_for_witness(row["W"]) < 0.3


def test_shared_qubits_are_rejected(clean_device):
    """Test pairs sharing a qubit cannot run simultaneously"""
    with pytest.raises(NonDisjointPairs):
        run_bell_experiment(clean_device, ("C1-D6", "D6-C1"), n_runs=1, shots=10)
    with pytest.raises(DomainError):
        run_bell_experiment(clean_device, n_runs=0)


def test_ideal_experiment(clean_device):
    """Test three ideal pairs each reach the quantum bound"""
    experiment = run_bell_experiment(clean_device, n_runs=3, shots=1000, seed=1)
    assert experiment.pairs == tuple(BELL_PAIRS)
    for result in experiment.results.values():
        assert result.w == pytest.approx(TSIRELSON_BOUND)
        assert result.n_runs == 3
    assert experiment.w_sum == pytest.approx(6.0 * SQRT2)
    assert len(experiment.runs) == 9
    summary = experiment.summary()
    assert summary["classical_bound"] == 6.0
    assert set(summary["pairs"]) == set(BELL_PAIRS)


def test_depolarized_experiment(make_device):
    """Test the mean witness follows (1 - lambda) 2 sqrt(2)"""
    device = make_device(
        native_depolarizing={p: 0.2 for p in BELL_PAIRS},
        decoherence=False,
        idle_zz=False,
    )
    experiment = run_bell_experiment(device, n_runs=10, shots=2000, seed=2)
    expected = witness_for_depolarizing(0.2)
    for result in experiment.results.values():
        assert result.w == pytest.approx(expected, abs=0.03)
        assert 0.01 < result.w_err < 0.06
    assert experiment.violation() > 3.0

    histogram = witness_histogram(experiment.runs["W"], bins=5)
    assert histogram["count"].sum() == 30
