"""
Tests for single-transmon physics
"""

import numpy as np
import pytest

from modchip.datasets import load_design_targets
from modchip.device.transmon import (
    QubitKind,
    TransmonSpec,
    assembly_permutations,
    charge_basis_levels,
    charge_matrix_elements,
    ej_eff,
    ej_from_conductance,
    ladder_elements,
    predict_f01_from_conductance,
    prediction_error,
    spec_from_targets,
    transmon_levels,
)
from modchip.errors import DomainError, NonTransmonRegime, NoSolution


@pytest.mark.parametrize("row", load_design_targets().to_dict("records"))
def test_design_targets_round_trip(row):
    """Test solved specs reproduce every design class"""
    kind = QubitKind(row["kind"])
    spec = spec_from_targets(
        row["f01_max_MHz"], row["f01_min_MHz"], row["eta_MHz"], kind=kind
    )
    top = transmon_levels(spec, 0.0)
    bottom = transmon_levels(spec, 0.5)

    assert spec.kind is kind
    assert top.f01 == pytest.approx(row["f01_max_MHz"], abs=1.0)
    assert bottom.f01 == pytest.approx(row["f01_min_MHz"], abs=1.0)
    assert top.eta == pytest.approx(row["eta_MHz"], rel=0.05)


def test_fixed_qubit_has_no_asymmetry():
    """Test equal targets give a fixed-frequency spec"""
    spec = spec_from_targets(3654.0, 3654.0, -190.0)
    assert spec.kind is QubitKind.FIXED
    assert spec.d_asym == 0.0
    assert ej_eff(spec, 0.3) == spec.E_J_sum


def test_asymptotic_spectrum_matches_charge_basis():
    """Test the Mathieu expansion against exact charge-basis diagonalization"""
    spec = spec_from_targets(5066.0, 4266.0, -200.0, kind=QubitKind.TUNABLE)
    for phi in (0.0, 0.2, 0.5):
        levels = transmon_levels(spec, phi)
        energies, _ = charge_basis_levels(levels.E_J_eff, spec.E_C)
        f01 = 1e3 * (energies[1] - energies[0])
        eta = 1e3 * (energies[2] - 2 * energies[1] + energies[0])
        assert levels.f01 == pytest.approx(f01, rel=1e-3)
        assert levels.eta == pytest.approx(eta, rel=1e-2)


def test_flux_tuning_lowers_frequency_and_matrix_element():
    """Test f01 and mu01 decrease from the sweet spot to half flux"""
    spec = spec_from_targets(4946.0, 4146.0, -200.0, kind=QubitKind.TUNABLE)
    top = transmon_levels(spec, 0.0)
    bottom = transmon_levels(spec, 0.5)

    assert top.mu01 == pytest.approx(1.0)
    assert bottom.f01 < top.f01
    assert bottom.mu01 < 1.0
    assert bottom.E_J_eff == pytest.approx(spec.E_J_sum * spec.d_asym)


def test_charge_matrix_elements():
    """Test the normalized elements approach their harmonic-oscillator values"""
    spec = spec_from_targets(5066.0, 4266.0, -200.0, kind=QubitKind.TUNABLE)
    lam, Lam, mu01, mu12 = charge_matrix_elements(spec, 0.0)
    assert lam == pytest.approx(1.0 / np.sqrt(2.0), rel=0.05)
    assert Lam == pytest.approx(1.0 / np.sqrt(2.0), rel=0.05)
    assert mu01 == pytest.approx(1.0)
    assert mu12 == pytest.approx(Lam / lam)
    assert charge_matrix_elements(spec, 0.4)[2] < mu01


def test_ladder_elements_shape_and_normalization():
    """Test ladder elements are normalized to the sweet-spot 0-1 element"""
    spec = spec_from_targets(5066.0, 4266.0, -200.0, kind=QubitKind.TUNABLE)
    phi = np.linspace(-0.5, 0.5, 11)
    ladder = ladder_elements(spec, phi)

    assert ladder.shape == (11, 2)
    assert ladder[5, 0] == pytest.approx(1.0, abs=1e-6)
    # sqrt(2) * mu12 is close to sqrt(2) deep in the transmon regime
    assert ladder[5, 1] == pytest.approx(np.sqrt(2.0), rel=0.05)
    np.testing.assert_allclose(ladder, ladder[::-1], atol=1e-9)


def test_transmon_regime_guard():
    """Test E_J/E_C at or below 20 is rejected"""
    with pytest.raises(NonTransmonRegime):
        TransmonSpec(kind=QubitKind.FIXED, E_J_sum=2.0, E_C=0.2)

    spec = TransmonSpec(kind=QubitKind.TUNABLE, E_J_sum=10.0, E_C=0.2, d_asym=0.1)
    with pytest.raises(NonTransmonRegime):
        transmon_levels(spec, 0.5)


def test_spec_validation():
    """Test invalid energies and asymmetry raise DomainError"""
    with pytest.raises(DomainError):
        TransmonSpec(kind=QubitKind.FIXED, E_J_sum=-1.0, E_C=0.2)
    with pytest.raises(DomainError):
        TransmonSpec(kind=QubitKind.TUNABLE, E_J_sum=12.0, E_C=0.2, d_asym=1.0)


def test_spec_from_targets_rejects_bad_targets():
    """Test impossible or inconsistent targets"""
    with pytest.raises(DomainError):
        spec_from_targets(4000.0, 5000.0, -200.0)
    with pytest.raises(DomainError):
        spec_from_targets(5000.0, 4000.0, 10.0)
    with pytest.raises(NoSolution):
        spec_from_targets(20000.0, 20000.0, -5.0)


def test_ej_from_conductance():
    """Test Ambegaokar-Baratoff scaling at a 180 ueV gap"""
    assert ej_from_conductance(10_000.0) == pytest.approx(14.04, rel=2e-3)
    assert ej_from_conductance(20_000.0) == pytest.approx(
        ej_from_conductance(10_000.0) / 2.0
    )
    with pytest.raises(DomainError):
        ej_from_conductance(0.0)


def test_frequency_prediction_from_resistance():
    """Test predicted f01 follows the junction resistance"""
    low = predict_f01_from_conductance(8_000.0, 0.2)
    high = predict_f01_from_conductance(12_000.0, 0.2)
    assert low > high > 0
    assert prediction_error(102.0, 100.0) == pytest.approx(0.02)
    with pytest.raises(DomainError):
        prediction_error(1.0, 0.0)


def test_assembly_permutations():
    """Test ordered die selections for a four-slot module"""
    assert assembly_permutations(220, 4) == 2_279_203_080
    assert assembly_permutations(4, 0) == 1
    with pytest.raises(DomainError):
        assembly_permutations(3, 4)
