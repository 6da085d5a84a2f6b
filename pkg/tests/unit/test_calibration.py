"""
Tests for Ramsey, readout, T1, gate calibration and the retune loop
"""

import numpy as np
import pytest

from modchip.calibration.gate_cal import calibrate_gate, transfer
from modchip.calibration.ramsey import fit_ramsey, measure_chi_qq, time_ramsey
from modchip.calibration.retune import (
    calibrate_readout,
    measure_t1,
    park,
    retune_pipeline,
    run_timeseries,
)
from modchip.coupling.dispersive import g_from_chi
from modchip.device.transmon import transmon_levels
from modchip.dynamics.gates import predicted_gate_time
from modchip.dynamics.sidebands import GateType
from modchip.dynamics.system import pair_system
from modchip.errors import DomainError, NoTransfer, OutOfBand, PipelineError

SHORT_T1_DELAYS = np.linspace(0.0, 200_000.0, 6)
OUT_OF_BAND_GRID = [1500.0, 1600.0, 1700.0]


def test_fit_ramsey_recovers_frequency():
    """Test the damped-sinusoid fit on a noiseless fringe"""
    t = np.linspace(0.0, 4000.0, 81)
    p = 0.5 + 0.5 * np.cos(2 * np.pi * 1.3e-3 * t)
    fit = fit_ramsey(t, p, shots=10_000)
    assert fit["frequency"] == pytest.approx(1.3, abs=1e-3)
    assert fit["visibility"] == pytest.approx(1.0, abs=1e-2)


def test_fit_ramsey_flat_trace():
    """Test a trace without fringes reports zero frequency"""
    fit = fit_ramsey(np.linspace(0.0, 4000.0, 41), np.full(41, 0.5), shots=500)
    assert fit["frequency"] == 0.0
    assert fit["uncertainty"] > 0.0


def test_time_ramsey_finds_frequency_offset(make_device):
    """Test a 200 kHz offset from the drive frame is recovered"""
    device = make_device(
        frequency_offset_MHz={"D6": 0.2}, decoherence=False, idle_zz=False
    )
    result = time_ramsey(device, "D6", seed=1)
    assert result.offset == pytest.approx(0.2, abs=0.01)
    assert result.uncertainty < 0.01
    assert result.to_dict()["qubit"] == "D6"


def test_time_ramsey_validates_delays(clean_device):
    """Test too few or too short delay grids"""
    with pytest.raises(DomainError):
        time_ramsey(clean_device, "D6", delays=[0.0, 10.0, 20.0])
    with pytest.raises(DomainError):
        time_ramsey(clean_device, "D6", delays=np.linspace(0.0, 500.0, 11))


def test_two_sided_ramsey_keeps_negative_offset(make_device):
    """Test an offset beyond -delta_f is recovered with its sign"""
    device = make_device(
        frequency_offset_MHz={"D6": -1.6}, decoherence=False, idle_zz=False
    )
    result = time_ramsey(device, "D6", seed=3, two_sided=True)
    assert result.offset == pytest.approx(-1.6, abs=0.02)
    assert result.frequency == pytest.approx(0.6, abs=0.02)
    assert result.to_dict()["two_sided"] is True


@pytest.mark.parametrize("offset", [1.3, -3.5])
def test_single_sided_ramsey_refuses_ambiguous_fringe(make_device, offset):
    """Test a fringe beyond twice the detuning raises instead of folding"""
    device = make_device(
        frequency_offset_MHz={"D6": offset}, decoherence=False, idle_zz=False
    )
    with pytest.raises(DomainError):
        time_ramsey(device, "D6", seed=4)
    with pytest.raises(DomainError):
        time_ramsey(device, "D6", delta_f=0.0, two_sided=True)


def test_chi_larger_than_detuning_keeps_sign(make_device):
    """Test a conditional shift exceeding delta_f matches the wide-detuning value"""
    device = make_device(decoherence=False)
    reference, _ = measure_chi_qq(device, "C1-D6", seed=2)
    small_df = 0.05
    assert abs(reference.chi_qq) > small_df

    narrow, _ = measure_chi_qq(
        device,
        "C1-D6",
        seed=2,
        delta_f=small_df,
        delays=np.linspace(0.0, 40_000.0, 201),
    )
    assert narrow.chi_qq < 0.0
    assert narrow.chi_qq == pytest.approx(reference.chi_qq, rel=0.1)


@pytest.mark.slow
def test_ramsey_frequency_is_unbiased(make_device):
    """Test the mean offset error over 200 seeds against the fit uncertainty"""
    device = make_device(
        frequency_offset_MHz={"D6": 0.2}, decoherence=False, idle_zz=False
    )
    runs = [time_ramsey(device, "D6", seed=1000 + i) for i in range(200)]
    errors = np.array([r.offset - 0.2 for r in runs])
    sigma_fit = float(np.mean([r.uncertainty for r in runs]))
    standard_error = float(errors.std(ddof=1)) / np.sqrt(errors.size)

    # bias bound plus the sampling spread of a 200-run mean
    assert abs(errors.mean()) < 0.1 * sigma_fit + 3.0 * standard_error
    assert 0.5 < errors.std(ddof=1) / sigma_fit < 2.0


@pytest.mark.slow
def test_gate_calibration_is_repeatable(clean_device):
    """Test two calibrations of a noiseless device agree within the scan resolution"""
    first = calibrate_gate(clean_device, "C1-D6", GateType.ISWAP, seed=8)
    second = calibrate_gate(clean_device, "C1-D6", GateType.ISWAP, seed=9)

    assert abs(second.f_p_star - first.f_p_star) < 0.5 * first.g_eff
    assert second.t_gate == pytest.approx(first.t_gate, rel=0.05)
    assert second.timestamp > first.timestamp


def test_measured_chi_inverts_to_bare_coupling(make_device, topology):
    """Test chi_qq from conditional Ramsey gives back the C1-D6 coupling"""
    device = make_device(decoherence=False)
    chi_c1, chi_d6 = measure_chi_qq(device, "C1-D6", seed=2)
    assert chi_c1.chi_qq < 0.0
    assert chi_c1.chi_qq == pytest.approx(chi_d6.chi_qq, rel=0.05)

    levels = [transmon_levels(topology.qubit(q).spec, 0.0) for q in ("C1", "D6")]
    estimate = g_from_chi(chi_c1, *levels)
    assert estimate.g_MHz == pytest.approx(topology.pair("C1-D6").g_MHz, rel=0.05)


def test_park_uses_sweet_spot(topology, clean_device):
    """Test parking reports both qubits at zero flux"""
    result = park(clean_device, "D6-C1")
    assert result.pair == "C1-D6"
    assert result.tunable == "C1"
    assert result.phi_dc == 0.0
    assert result.f01_tunable > result.f01_fixed


def test_calibrate_readout(make_device, topology):
    """Test the assignment matrix reflects the configured readout error"""
    device = make_device(topology.with_readout_error(0.05), decoherence=False)
    readout = calibrate_readout(device, ("D6", "C1"), shots=4000, seed=3)
    for q in ("D6", "C1"):
        assert readout[q].misclassification == pytest.approx(0.05, abs=0.015)
        assert readout[q].assignment_fidelity == pytest.approx(0.95, abs=0.015)


def test_measure_t1(make_device):
    """Test an exponential fit recovers the 73 us fixed-qubit T1"""
    device = make_device(idle_zz=False)
    result = measure_t1(
        device, "D6", delays=np.linspace(0.0, 200_000.0, 21), shots=2000, seed=4
    )
    assert result.T1 == pytest.approx(73.0, rel=0.15)
    with pytest.raises(DomainError):
        measure_t1(device, "D6", delays=[0.0, 1.0, 2.0])


def test_transfer_metric():
    """Test the exchanged population for each gate"""
    counts = {"10": 3, "01": 1}
    assert transfer(counts, GateType.ISWAP) == pytest.approx(0.75)
    assert transfer({"11": 1, "00": 3}, GateType.CZ20) == pytest.approx(0.75)


def test_calibration_window_outside_band(clean_device):
    """Test a scan below the control band is refused"""
    with pytest.raises(OutOfBand):
        calibrate_gate(clean_device, "C1-D6", GateType.ISWAP, f_p_grid=[50, 60, 70])


def test_calibration_without_transfer(clean_device):
    """Test an off-resonant window raises NoTransfer"""
    with pytest.raises(NoTransfer):
        calibrate_gate(
            clean_device,
            "C1-D6",
            GateType.ISWAP,
            f_p_grid=[400.0, 410.0, 420.0],
            t_grid=[10.0, 20.0, 30.0],
            shots=200,
            seed=5,
        )


def test_pipeline_collects_stage_errors(make_device):
    """Test a failing gate stage keeps the readout and T1 results"""
    device = make_device(idle_zz=False)
    with pytest.raises(PipelineError) as info:
        retune_pipeline(
            device,
            "C1-D6",
            GateType.ISWAP,
            seed=6,
            shots=200,
            t1_delays=SHORT_T1_DELAYS,
            f_p_grid=OUT_OF_BAND_GRID,
        )
    record = info.value.record
    assert set(record.stage_errors) == {"gate"}
    assert set(record.readout) == {"D6", "C1"}
    assert set(record.t1) == {"D6", "C1"}
    assert record.calibration is None
    assert record.to_dict()["calibration"] is None


def test_timeseries_tracks_scheduled_t1(make_device):
    """Test T1 drops after its scheduled change and failures are recorded"""
    device = make_device(
        idle_zz=False, t1_schedule={"D6": [(0.0, 73.0), (1000.0, 20.0)]}
    )
    frame = run_timeseries(
        device,
        "C1-D6",
        GateType.ISWAP,
        n_points=2,
        interval_s=3600.0,
        seed=7,
        retune_options={
            "shots": 500,
            "t1_delays": np.linspace(0.0, 200_000.0, 11),
            "f_p_grid": OUT_OF_BAND_GRID,
        },
    )
    assert len(frame) == 2
    assert frame["clock_s"].iloc[1] > 3600.0
    assert frame["error"].notna().all()
    assert frame["T1_D6_us"].iloc[1] < 0.5 * frame["T1_D6_us"].iloc[0]
    assert "F_RB" not in frame.columns
    with pytest.raises(DomainError):
        run_timeseries(device, "C1-D6", GateType.ISWAP, n_points=0, interval_s=1.0)


@pytest.mark.slow
def test_calibrated_gate_matches_prediction(clean_device, topology):
    """Test the chevron calibration lands on the sideband resonance"""
    system = pair_system(topology, "C1-D6")
    f_pred, t_pred = predicted_gate_time(system, GateType.ISWAP, phi_ac=0.25)
    calibration = calibrate_gate(clean_device, "C1-D6", GateType.ISWAP, seed=8)

    g_eff = 1e3 / (4.0 * t_pred)
    assert abs(calibration.f_p_star - f_pred) < g_eff
    assert calibration.t_gate == pytest.approx(t_pred, rel=0.1)
    assert calibration.max_transfer > 0.9
    assert calibration.pulse().f_p == calibration.f_p_star
    assert calibration.to_dict()["gate"] == "iSWAP"
