"""
Command implementations. Each command reads its knobs from the scenario,
writes CSV/JSON artifacts through the writer and returns a short summary.
"""

import json
import logging
import os
import shutil
import time
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .. import __version__
from ..bell.witness import (
    depolarizing_for_witness,
    run_bell_experiment,
    witness_histogram,
)
from ..benchmarking.policy import quote_policy
from ..benchmarking.rb import fit_decay, irb_from_fits, run_rb
from ..calibration.device import SimulatedDevice
from ..calibration.gate_cal import calibrate_gate
from ..calibration.ramsey import measure_chi_qq
from ..calibration.retune import retune_pipeline, run_timeseries
from ..config import (
    BELL_PAIRS,
    BELL_RUNS,
    BELL_SHOTS,
    CALIBRATION_SHOTS,
    CHEVRON_TOLERANCE,
    DEFAULT_PHI_AC,
    FIXED_T1_US,
    FIXED_T2_US,
    OUTPUT_ROOT_ENV,
    RAMSEY_DETUNING_MHZ,
    RAMSEY_POINTS,
    RAMSEY_SPAN_NS,
    RB_LENGTHS,
    RB_SEQUENCES,
    RB_SHOTS,
)
from ..coupling.dispersive import chi_qq_model, g_from_chi
from ..coupling.geometry import fit_g_vs_height, points_from_table
from ..datasets import load_bell_marginals, load_bump_couplings, load_gate_performance
from ..device.topology import QubitNoise
from ..device.transmon import assembly_permutations, transmon_levels
from ..dynamics.gates import coherent_error, design_gate_pulse, predicted_gate_time
from ..dynamics.hamiltonian import static_zz
from ..dynamics.lindblad import coherence_limited_fidelity
from ..dynamics.propagate import chevron_scan
from ..dynamics.pulses import Envelope, FluxPulse
from ..dynamics.sidebands import GateType
from ..dynamics.system import NoiseSpec, pair_noise, pair_system
from ..errors import ModchipError, OutputExistsError, SchemaError
from .manifest import MANIFEST_NAME, ArtifactWriter, RunManifest, verify_manifest
from .scenario import Command, Scenario
from .seeding import task_seed

logger = logging.getLogger(__name__)

Summary = Dict[str, Any]

CHEVRON_STATES = {
    GateType.ISWAP: ("01", "10"),
    GateType.CZ02: ("11", "02"),
    GateType.CZ20: ("11", "20"),
}


def _gate(scenario: Scenario, default: str = "CZ02") -> GateType:
    return GateType(scenario.param("gate", default))


def _pair(scenario: Scenario, default: str = "C1-D6") -> str:
    return scenario.topology().pair(scenario.param("pair", default)).label


def device_validate(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    topology = scenario.topology()
    writer.write_csv("qubits.csv", topology.design_table())
    rows = []
    for record in topology.pairs:
        system = pair_system(topology, record.label)
        fixed = transmon_levels(system.fixed, 0.0)
        tunable = transmon_levels(system.tunable, 0.0)
        try:
            chi_model = chi_qq_model(record.g_MHz, fixed, tunable)
        except ModchipError:
            chi_model = float("nan")
        rows.append(
            {
                "pair": record.label,
                "fixed": record.fixed,
                "tunable": record.tunable,
                "g_MHz": record.g_MHz,
                "bump_height_um": record.bump_height_um,
                "phi_ac_phi0": record.phi_ac,
                "detuning_MHz": tunable.f01 - fixed.f01,
                "chi_model_MHz": chi_model,
                "zz_exact_MHz": static_zz(system),
            }
        )
    writer.write_csv("pairs.csv", pd.DataFrame(rows))
    summary: Summary = {
        "name": topology.name,
        "qubits": len(topology.qubits),
        "pairs": len(topology.pairs),
        "control_band_MHz": list(topology.control_band_MHz),
    }
    if scenario.param("candidate_dies") is not None:
        summary["assembly_permutations"] = assembly_permutations(
            int(scenario.param("candidate_dies")), int(scenario.param("slots", 4))
        )
    writer.write_json("device.json", summary)
    return summary


def chevron(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    topology = scenario.topology()
    label = _pair(scenario)
    gate = _gate(scenario, "iSWAP")
    system = pair_system(topology, label)
    phi_ac = float(scenario.param("phi_ac_phi0", topology.pair(label).phi_ac))
    phi_dc = float(scenario.param("phi_dc_phi0", 0.0))
    f_pred, t_pred = predicted_gate_time(system, gate, phi_ac, phi_dc)
    f_lo = float(scenario.param("f_p_min_MHz", f_pred - 30.0))
    f_hi = float(scenario.param("f_p_max_MHz", f_pred + 30.0))
    f_grid = np.linspace(f_lo, f_hi, int(scenario.param("f_points", 51)))
    t_max = float(scenario.param("t_max_ns", min(2.5 * t_pred, 1000.0)))
    t_points = int(scenario.param("t_points", 50))
    t_grid = np.linspace(t_max / t_points, t_max, t_points)
    initial, target = CHEVRON_STATES[gate]
    template = FluxPulse(phi_dc, phi_ac, f_lo, t_max, envelope=Envelope.RECTANGULAR)
    chevron_map = chevron_scan(
        system,
        f_grid,
        t_grid,
        initial,
        template,
        target,
        tol=float(scenario.param("tolerance", CHEVRON_TOLERANCE)),
        workers=scenario.param("workers"),
    )
    writer.write_csv("chevron.csv", chevron_map.to_frame())
    summary: Summary = {
        "pair": label,
        "gate": gate.value,
        "initial_state": initial,
        "target_state": target,
        "predicted_f_p_MHz": f_pred,
        "predicted_t_ns": t_pred,
        "peak": chevron_map.peak(),
    }
    writer.write_json("chevron.json", summary)
    return summary


def calibrate(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    device = scenario.build_device()
    label = _pair(scenario)
    gate = _gate(scenario)
    shots = int(scenario.param("shots", CALIBRATION_SHOTS))
    seed = task_seed(scenario.seed, "calibrate", label)
    summary: Summary = {"pair": label, "gate": gate.value}
    if scenario.param("retune", False):
        record = retune_pipeline(device, label, gate, seed, shots)
        summary["retune"] = record.to_dict()
    else:
        phi_ac = scenario.param("phi_ac_phi0")
        calibration = calibrate_gate(
            device, label, gate, phi_ac=phi_ac, shots=shots, seed=seed
        )
        summary["calibration"] = calibration.to_dict()
    if scenario.param("n_points") is not None:
        series = run_timeseries(
            device,
            label,
            gate,
            int(scenario.param("n_points")),
            float(scenario.param("interval_s", 3600.0)),
            task_seed(scenario.seed, "timeseries", label),
            lengths=scenario.param("lengths", RB_LENGTHS),
            n_seq=int(scenario.param("n_seq", RB_SEQUENCES)),
            shots=shots,
        )
        writer.write_csv("timeseries.csv", series)
        summary["timeseries_points"] = len(series)
    writer.write_json("calibration.json", summary)
    return summary


def chi(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    device = scenario.build_device()
    topology = device.topology
    label = _pair(scenario)
    record = topology.pair(label)
    span = float(scenario.param("span_ns", RAMSEY_SPAN_NS))
    delays = np.linspace(0.0, span, int(scenario.param("points", RAMSEY_POINTS)))
    forward, reverse = measure_chi_qq(
        device,
        label,
        int(scenario.param("shots", CALIBRATION_SHOTS)),
        task_seed(scenario.seed, "chi", label),
        float(scenario.param("delta_f_MHz", RAMSEY_DETUNING_MHZ)),
        delays,
        two_sided=bool(scenario.param("two_sided", True)),
    )
    q1, q2 = (transmon_levels(topology.qubit(q).spec, 0.0) for q in record.qubits)
    directions = []
    for shift in (forward, reverse):
        entry: Dict[str, Any] = {
            "direction": shift.direction.value,
            "chi_MHz": shift.chi_qq,
            "chi_err_MHz": shift.uncertainty,
        }
        try:
            estimate = g_from_chi(shift, q1, q2)
            entry["g_MHz"] = estimate.g_MHz
            entry["g_err_MHz"] = estimate.uncertainty_MHz
        except ModchipError as e:
            entry["g_error"] = str(e)
        directions.append(entry)
    summary: Summary = {"pair": label, "g_true_MHz": record.g_MHz, "shifts": directions}
    writer.write_json("chi.json", summary)
    return summary


def _rb_knobs(scenario: Scenario) -> Tuple[List[int], int, int]:
    lengths = [int(m) for m in scenario.param("lengths", RB_LENGTHS)]
    return (
        lengths,
        int(scenario.param("n_seq", RB_SEQUENCES)),
        int(scenario.param("shots", RB_SHOTS)),
    )


def rb(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    device = scenario.build_device()
    label = _pair(scenario)
    gate = _gate(scenario)
    lengths, n_seq, shots = _rb_knobs(scenario)
    seed = task_seed(scenario.seed, "rb", label)
    data = run_rb(device, label, lengths, n_seq, shots, seed, False, gate)
    fit = fit_decay(data)
    writer.write_csv("rb_sequences.csv", data.frame)
    writer.write_csv("rb_lengths.csv", data.summary())
    summary: Summary = {"pair": label, "gate": gate.value, **fit.to_dict()}
    writer.write_json("rb.json", summary)
    return summary


def irb(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    device = scenario.build_device()
    label = _pair(scenario)
    gate = _gate(scenario)
    lengths, n_seq, shots = _rb_knobs(scenario)
    seed = task_seed(scenario.seed, "rb", label)
    reference = run_rb(device, label, lengths, n_seq, shots, seed, False, gate)
    interleaved = run_rb(device, label, lengths, n_seq, shots, seed, True, gate)
    ref_fit, int_fit = fit_decay(reference), fit_decay(interleaved)
    estimate = irb_from_fits(ref_fit, int_fit)
    quoted = quote_policy(ref_fit.fidelity, estimate.fidelity)
    writer.write_csv("irb_reference.csv", reference.summary())
    writer.write_csv("irb_interleaved.csv", interleaved.summary())
    summary: Summary = {
        "pair": label,
        "gate": gate.value,
        "reference": ref_fit.to_dict(),
        "interleaved": int_fit.to_dict(),
        **estimate.to_dict(),
        **quoted.to_dict(),
    }
    writer.write_json("irb.json", summary)
    return summary


def _bell_device(scenario: Scenario, pairs: List[str]) -> SimulatedDevice:
    """Device whose native-gate depolarizing reproduces the tabulated witnesses"""
    device = scenario.build_device()
    if not scenario.param("tune_to_marginals", False):
        return device
    marginals = load_bell_marginals().set_index("pair")["W"]
    topology = device.topology
    for label in pairs:
        record = topology.pair(label)
        if record.label not in marginals.index:
            raise SchemaError(
                f"no tabulated witness for {record.label}", path="params/pairs"
            )
        eps = [topology.qubit(q).readout_error for q in record.qubits]
        contraction = (1.0 - 2.0 * eps[0]) * (1.0 - 2.0 * eps[1])
        epsilon = 0.5 * (1.0 - np.sqrt(contraction))
        lam = depolarizing_for_witness(float(marginals[record.label]), epsilon)
        device.noise.native_depolarizing[record.label] = lam
    return device


def bell(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    pairs = list(scenario.param("pairs", BELL_PAIRS))
    device = _bell_device(scenario, pairs)
    experiment = run_bell_experiment(
        device,
        pairs,
        int(scenario.param("n_runs", BELL_RUNS)),
        int(scenario.param("shots", BELL_SHOTS)),
        task_seed(scenario.seed, "bell"),
    )
    bins = int(scenario.param("bins", 20))
    histograms = [
        witness_histogram(result.runs, bins).assign(pair=label)
        for label, result in experiment.results.items()
    ]
    writer.write_csv("bell_runs.csv", experiment.runs)
    writer.write_csv("bell_histogram.csv", pd.concat(histograms, ignore_index=True))
    summary = experiment.summary()
    writer.write_json("bell.json", summary)
    return summary


def coupling_sweep(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    source = scenario.param("source", "meas")
    fit = fit_g_vs_height(points_from_table(load_bump_couplings(), source))
    heights = np.linspace(
        float(scenario.param("h_min_um", 1.5)),
        float(scenario.param("h_max_um", 4.0)),
        int(scenario.param("points", 26)),
    )
    frame = pd.DataFrame({"h_um": heights, "g_MHz": fit.g(heights)})
    label = scenario.param("pair")
    if label is not None:
        topology = scenario.topology()
        label = topology.pair(label).label
        gate = _gate(scenario)
        phi_ac = float(scenario.param("phi_ac_phi0", DEFAULT_PHI_AC))
        noise = pair_noise(topology, label)
        columns: Dict[str, List[float]] = {"t_gate_ns": [], "incoherent_error": []}
        if scenario.param("coherent", False):
            columns["coherent_error"] = []
        for g in frame["g_MHz"]:
            system = replace(pair_system(topology, label), g=float(g))
            try:
                pulse = design_gate_pulse(system, gate, phi_ac)
                point = {
                    "t_gate_ns": pulse.duration,
                    "incoherent_error": 1.0
                    - coherence_limited_fidelity(noise, pulse.duration),
                }
                if "coherent_error" in columns:
                    point["coherent_error"] = coherent_error(
                        system, pulse, gate, tol=CHEVRON_TOLERANCE
                    )
            except ModchipError as e:
                logger.warning("%s at g=%.2f MHz: %s", label, g, e)
                point = {}
            for key, values in columns.items():
                values.append(point.get(key, float("nan")))
        frame = frame.assign(**columns)
    writer.write_csv("coupling_sweep.csv", frame)
    summary: Summary = {
        "source": source,
        "a_MHz_um": fit.a,
        "a_err_MHz_um": fit.a_err,
        "b_MHz": fit.b,
        "b_err_MHz": fit.b_err,
        "g_min_MHz": float(frame["g_MHz"].min()),
        "g_max_MHz": float(frame["g_MHz"].max()),
    }
    writer.write_json("coupling_fit.json", summary)
    return summary


def coherence_limit(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    fixed = QubitNoise(
        float(scenario.param("fixed_T1_us", FIXED_T1_US)),
        float(scenario.param("fixed_T2_us", FIXED_T2_US)),
    )
    if scenario.param("T1_mod_us") is not None:
        table = pd.DataFrame(
            [
                {
                    "pair": scenario.param("pair", "custom"),
                    "T1_mod_us": float(scenario.param("T1_mod_us")),
                    "T2_mod_us": float(scenario.param("T2_mod_us")),
                    "t_gate_ns": float(scenario.param("t_gate_ns")),
                }
            ]
        )
    else:
        table = load_gate_performance()
        if scenario.param("pairs") is not None:
            table = table[table["pair"].isin(scenario.param("pairs"))]
    exchange = bool(scenario.param("exchange", True))
    values = []
    for row in table.itertuples():
        noise = NoiseSpec.from_modulated(row.T1_mod_us, row.T2_mod_us, fixed=fixed)
        limit = coherence_limited_fidelity(noise, row.t_gate_ns, exchange=exchange)
        values.append(100.0 * limit)
    out = table.assign(model_pct=values).rename(
        columns={"coherence_limited_pct": "tabulated_pct"}
    )
    writer.write_csv("coherence_limit.csv", out.reset_index(drop=True))
    summary: Summary = {"rows": len(out), "exchange": exchange}
    if "tabulated_pct" in out:
        deviation = (out["model_pct"] - out["tabulated_pct"]).abs()
        summary["max_deviation_pp"] = float(deviation.max())
    writer.write_json("coherence_limit.json", summary)
    return summary


def _read_run(directory: Path) -> Dict[str, Any]:
    if not (directory / MANIFEST_NAME).is_file():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {directory}")
    problems = verify_manifest(directory)
    if problems:
        raise SchemaError("; ".join(problems), path=str(directory))
    found: Dict[str, Any] = {}
    for name in ("calibration.json", "irb.json"):
        if (directory / name).is_file():
            found[name] = json.loads((directory / name).read_text(encoding="utf-8"))
    if (directory / "coherence_limit.csv").is_file():
        found["coherence_limit.csv"] = pd.read_csv(directory / "coherence_limit.csv")
    return found


def report(scenario: Scenario, writer: ArtifactWriter) -> Summary:
    """Per-pair gate summary rows joined across completed runs"""
    rows: Dict[str, Dict[str, Any]] = {}

    def row(pair: str) -> Dict[str, Any]:
        return rows.setdefault(pair, {"pair": pair})

    for entry in scenario.param("runs", []):
        found = _read_run(scenario.resolve(entry))
        if "coherence_limit.csv" in found:
            for r in found["coherence_limit.csv"].to_dict("records"):
                row(r["pair"]).update(
                    {
                        "T1_mod_us": r["T1_mod_us"],
                        "T2_mod_us": r["T2_mod_us"],
                        "coherence_limited_pct": r["model_pct"],
                        "t_gate_ns": r["t_gate_ns"],
                    }
                )
        if "calibration.json" in found:
            cal = found["calibration.json"]
            details = cal.get("calibration")
            if details is None and cal.get("retune"):
                details = cal["retune"]["calibration"]
            if details:
                row(cal["pair"])["t_gate_ns"] = details["t_gate"]
        if "irb.json" in found:
            result = found["irb.json"]
            row(result["pair"]).update(
                {"measured_pct": 100.0 * result["quoted"], "quote_flag": result["flag"]}
            )
    columns = [
        "pair",
        "T1_mod_us",
        "T2_mod_us",
        "coherence_limited_pct",
        "measured_pct",
        "t_gate_ns",
        "quote_flag",
    ]
    table = pd.DataFrame([rows[p] for p in sorted(rows)], columns=columns)
    writer.write_csv("report.csv", table)
    summary: Summary = {"rows": table.to_dict("records")}
    writer.write_json("report.json", summary)
    return {"rows": len(table)}


COMMANDS: Dict[Command, Callable[[Scenario, ArtifactWriter], Summary]] = {
    Command.DEVICE_VALIDATE: device_validate,
    Command.CHEVRON: chevron,
    Command.CALIBRATE: calibrate,
    Command.CHI: chi,
    Command.RB: rb,
    Command.IRB: irb,
    Command.BELL: bell,
    Command.COUPLING_SWEEP: coupling_sweep,
    Command.COHERENCE_LIMIT: coherence_limit,
    Command.REPORT: report,
}


def output_directory(scenario: Scenario, override: Optional[Path] = None) -> Path:
    if override is not None:
        return Path(override)
    if scenario.output is not None:
        return scenario.output
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
    return root / f"{scenario.command.value}-{scenario.seed}"


def prepare_directory(directory: Path, force: bool = False) -> None:
    """Create the run directory; a non-empty one is only replaced with force"""
    if directory.exists() and any(directory.iterdir()):
        if not force:
            raise OutputExistsError(
                f"{directory} is not empty; use --force to replace it"
            )
        shutil.rmtree(directory)
    directory.mkdir(parents=True, exist_ok=True)


def execute(
    scenario: Scenario, output: Optional[Path] = None, force: bool = False
) -> RunManifest:
    """Run a scenario's command, write its artifacts and then the manifest"""
    directory = output_directory(scenario, output)
    prepare_directory(directory, force)
    writer = ArtifactWriter(directory)
    start = time.perf_counter()
    summary = COMMANDS[scenario.command](scenario, writer)
    manifest = RunManifest(
        scenario=scenario.echo(),
        artifacts=dict(writer.artifacts),
        version=__version__,
        duration_s=round(time.perf_counter() - start, 3),
        summary=summary,
    )
    manifest.write(directory)
    logger.info(
        "%s finished: %d artifacts in %s",
        scenario.command.value,
        len(writer.artifacts),
        directory,
    )
    return manifest
