"""Run experiments described by an :class:`~atomlaser.config.ExperimentConfig`.

Every run owns one output directory holding

* ``series.csv``: the time series, preceded by ``#`` metadata lines,
* ``summary.json``: scalar results,
* ``manifest.json``: resolved config, version and timestamp. Passing it back
  to :func:`atomlaser.config.load_config` reproduces the run.

Series files contain no timestamps, so identical configs give byte-identical
CSV output.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import __version__, analytic, gpe
from .config import ExperimentConfig, config_from_sections, parse_frequency
from .errors import ConfigError, DegenerateOutputError, InvalidParameterError
from .report import RunReport

OUTPUT_ROOT_ENV = "ATOMLASER_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = "runs"

ANALYTIC_COLUMNS = ("t", "mu", "N", "flux", "velocity")
GPE_COLUMNS = ("t", "N_-1", "N_0", "N_+1", "flux", "v_out")

UNITS = {
    "t": "s",
    "mu": "J",
    "N": "atoms",
    "flux": "atoms/s",
    "velocity": "m/s",
    "detuning": "rad/s",
    "N_-1": "atoms",
    "N_0": "atoms",
    "N_+1": "atoms",
    "v_out": "m/s",
    "ejected": "atoms",
    "x": "m",
}


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT))


def resolve_output_dir(cfg: ExperimentConfig, out=None) -> Path:
    """``out`` if given, else ``[output] directory`` (relative to the output root), else ``<root>/<mode>``."""
    if out is not None:
        return Path(out)
    if cfg.output_dir:
        path = Path(cfg.output_dir)
        return path if path.is_absolute() else output_root() / path
    return output_root() / cfg.mode


# ---------------------------------------------------------------------------
# File output


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _clean(value):
    """Make floats JSON-safe (inf and nan become strings)."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return str(float(value))
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def write_json(path: Path, data: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def write_table(path: Path, columns: Dict[str, np.ndarray], metadata: Optional[dict] = None):
    """CSV with ``# key: value`` metadata lines and full-precision numbers."""
    names = list(columns)
    table = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in sorted((metadata or {}).items()):
            fh.write(f"# {key}: {json.dumps(_clean(value), sort_keys=True, default=_json_default)}\n")
        fh.write(",".join(names) + "\n")
        np.savetxt(fh, table, delimiter=",", fmt="%.17g")


def read_table(path) -> Tuple[Dict[str, np.ndarray], dict]:
    """Inverse of :func:`write_table`."""
    metadata = {}
    with open(path, encoding="utf-8") as fh:
        line = fh.readline()
        while line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            metadata[key] = json.loads(value)
            line = fh.readline()
        names = line.strip().split(",")
        table = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {n: table[:, i].copy() for i, n in enumerate(names)}, metadata


def _manifest(cfg: ExperimentConfig, report: RunReport, outputs: List[str]) -> dict:
    manifest = {
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "mode": cfg.mode,
        "source": cfg.source,
        "config": cfg.sections,
        "outputs": sorted(outputs),
    }
    manifest.update({k: v for k, v in report.manifest.items() if k not in manifest})
    return manifest


def save_report(report: RunReport, cfg: ExperimentConfig, out_dir: Path) -> Path:
    """Write series, summary and manifest (plus profiles/snapshots if present)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    columns = ANALYTIC_COLUMNS if report.kind.startswith("analytic") or report.kind == "chirp" else None
    if report.kind == "gpe-1d":
        columns = GPE_COLUMNS
    if columns is None:
        columns = tuple(report.series)
    extra = [c for c in report.series if c not in columns]
    meta = {"mode": report.kind, "units": {c: UNITS.get(c, "") for c in columns},
            "parameters": report.parameters}
    outputs = ["series.csv", "summary.json", "manifest.json"]
    write_table(out_dir / "series.csv", {c: report.series[c] for c in columns}, meta)
    if extra:
        write_table(out_dir / "diagnostics.csv", {"t": report.series["t"], **{c: report.series[c] for c in extra}},
                    {"units": {c: UNITS.get(c, "") for c in ["t", *extra]}})
        outputs.append("diagnostics.csv")
    if report.profiles:
        write_table(out_dir / "profiles.csv", report.profiles, {"units": {"x": "m", "veff_*": "J"}})
        outputs.append("profiles.csv")
    for i, snap in enumerate(report.snapshots):
        name = f"snapshot_{i:02d}.csv"
        gpe.write_snapshot(out_dir / name, snap)
        outputs.append(name)
    write_json(out_dir / "summary.json", report.summary)
    write_json(out_dir / "manifest.json", _manifest(cfg, report, outputs))
    return out_dir


# ---------------------------------------------------------------------------
# Analytic runs


def analytic_time_grid(cfg: ExperimentConfig, mu0: float, dimension: str) -> np.ndarray:
    auto = analytic.default_time_grid(cfg.trap, cfg.phys, mu0, dimension)
    t_end = cfg.t_end if cfg.t_end is not None else float(auto[-1])
    dt = cfg.dt if cfg.dt is not None else (float(auto[1] - auto[0]) if len(auto) > 1 else t_end)
    n = int(math.ceil(t_end / dt - 1e-9))
    return np.linspace(0.0, t_end, max(n, 1) + 1)


def _trajectory_report(traj: analytic.DecayTrajectory, kind: str) -> RunReport:
    series = {"t": traj.t, "mu": traj.mu, "N": traj.n_atoms, "flux": traj.flux, "velocity": traj.velocity}
    manifest = {"parameters": dict(traj.meta), "dimension": traj.dimension, "method": traj.method}
    return RunReport(kind=kind, series=series, manifest=manifest)


def run_analytic(cfg: ExperimentConfig, dimension: Optional[str] = None) -> RunReport:
    dimension = dimension or cfg.dimension
    phys, trap = cfg.phys, cfg.trap
    state = analytic.AnalyticState.from_atoms(cfg.n_atoms, phys, trap, dimension)
    t = analytic_time_grid(cfg, state.mu, dimension)
    traj = analytic.evolve_decay(state, t, trap, phys, method=cfg.method, dimension=dimension)
    rates = analytic.rate_set(trap, phys, state.mu, dimension)
    mu_inf, n_inf = analytic.steady_state(trap, phys, state.mu, dimension)
    try:
        v_mean, rel_width = analytic.velocity_width(traj, rates, phys)
    except DegenerateOutputError:
        v_mean, rel_width = 0.0, math.nan
    report = _trajectory_report(traj, f"analytic-{dimension}")
    report.summary = {
        "mode": report.kind,
        "method": cfg.method,
        "flag": traj.flag,
        "mu0": state.mu,
        "mu0_over_hbar": state.mu / phys.hbar,
        "mu_inf": mu_inf,
        "mu_inf_over_hbar": mu_inf / phys.hbar,
        "mu_final": float(traj.mu[-1]),
        "n0": state.n_atoms,
        "n_inf": n_inf,
        "n_final": float(traj.n_atoms[-1]),
        "gamma": rates.gamma,
        "alpha": rates.alpha,
        "gamma_pop": rates.gamma_pop,
        "delta_E": rates.delta_E,
        "r_res": rates.r_res,
        "flux0": float(traj.flux[0]),
        "v_mean": v_mean,
        "rel_velocity_width": rel_width,
        "steady_state_time": traj.steady_state_time(0.05),
        "t_end": float(t[-1]),
    }
    return report


def run_chirp(cfg: ExperimentConfig) -> RunReport:
    dimension = cfg.dimension
    phys, trap = cfg.phys, cfg.trap
    state = analytic.AnalyticState.from_atoms(cfg.n_atoms, phys, trap, dimension)
    t_star = analytic.chirp_exhaustion_time(state.mu, trap, phys, dimension)
    if cfg.t_end is not None:
        t_end = cfg.t_end
    else:
        t_end = 0.9 * t_star if math.isfinite(t_star) else 1.0
    dt = cfg.dt if cfg.dt is not None else t_end / 2000
    t = np.linspace(0.0, t_end, max(int(math.ceil(t_end / dt - 1e-9)), 1) + 1)
    traj, schedule = analytic.chirp_compensation(state, t, trap, phys, dimension)
    report = _trajectory_report(traj, "chirp")
    report.series["detuning"] = schedule
    v = traj.velocity
    report.summary = {
        "mode": "chirp",
        "dimension": dimension,
        "mu0": state.mu,
        "n0": state.n_atoms,
        "exhaustion_time": t_star,
        "t_end": float(t[-1]),
        "detuning_final": float(schedule[-1]),
        "v_mean": float(v[0]),
        "velocity_drift": float(np.max(np.abs(v / v[0] - 1.0))) if v[0] > 0 else 0.0,
        "n_final": float(traj.n_atoms[-1]),
    }
    return report


# ---------------------------------------------------------------------------
# GPE runs


def run_gpe(cfg: ExperimentConfig) -> RunReport:
    phys, trap, s = cfg.phys, cfg.trap, cfg.solver
    if s.t_end is None:
        raise ConfigError("gpe runs need solver.t_end")
    grid = gpe.default_grid(cfg.n_atoms, phys, trap, s.n_points, s.half_width_tf)
    f0 = gpe.prepare_ground_state(cfg.n_atoms, grid, phys, trap, method=s.ground_state, components=s.components)
    mu_gs, residual = gpe.ground_state_residual(f0, phys, trap)
    sc = gpe.default_config(
        cfg.n_atoms, grid, phys, trap, s.t_end,
        components=s.components,
        dt=s.dt,
        n_records=s.n_records,
        absorber_width_tf=s.absorber_width_tf,
        absorber_strength_rate=s.absorber_strength / phys.hbar,
        detector_tf=s.detector_tf,
        snapshot_times=s.snapshot_times,
    )
    report = gpe.run(f0, sc, phys, trap)
    S = report.series
    total = S["N_-1"] + S["N_0"] + S["N_+1"] + S["ejected"]
    summary = {
        "mode": "gpe-1d",
        "n0": float(S["N_-1"][0]),
        "n_final": float(S["N_-1"][-1]),
        "n0_final": float(S["N_0"][-1]),
        "n_plus_final": float(S["N_+1"][-1]),
        "ejected_final": float(S["ejected"][-1]),
        "bookkeeping_error": float(np.max(np.abs(total / total[0] - 1.0))),
        "mu0": float(S["mu"][0]),
        "mu_final": float(S["mu"][-1]),
        "ground_state_mu": mu_gs,
        "ground_state_residual": residual,
        "dt": sc.dt,
        "n_steps": sc.n_steps,
        "t_end": float(S["t"][-1]),
    }
    x = report.profiles["x"]
    for key, veff in report.profiles.items():
        if key.startswith("veff_"):
            mean, spread = gpe.potential_flatness(veff, x, phys, trap)
            tag = key[len("veff_"):]
            summary[f"veff_mean_{tag}"] = mean
            summary[f"veff_flatness_{tag}"] = spread
    report.summary = summary
    return report


# ---------------------------------------------------------------------------
# Comparison


def _population(report: RunReport) -> np.ndarray:
    if "N_-1" in report.series:
        return report.series["N_-1"]
    return report.series["N"]


def _mismatched(a: dict, b: dict, rel_tol=1e-9) -> List[str]:
    return gpe._mismatched(a, b, rel_tol)


def compare_runs(analytic_report: RunReport, gpe_report: RunReport, threshold=0.05, transient=None):
    """Relative deviation of the trapped population between two runs.

    Both N(t) series are interpolated onto the record times of ``gpe_report``
    that lie in the overlap of the two runs, after excluding the initial Rabi
    transient (``2 pi / Omega`` unless ``transient`` is given). Returns the
    comparison table and a result dict with ``max_dev``, ``mean_dev`` and a
    ``verdict`` of ``"PASS"`` or ``"FAIL"``.
    """
    for rep in (analytic_report, gpe_report):
        if rep.kind in ("analytic-3d",) or rep.manifest.get("dimension") == "3d":
            raise InvalidParameterError("comparisons are one-dimensional; got a 3d report")
    diff = _mismatched(analytic_report.parameters, gpe_report.parameters)
    if diff:
        raise InvalidParameterError(f"parameters differ between runs: {', '.join(diff)}")
    rabi = gpe_report.parameters.get("rabi") or 0.0
    if transient is None:
        transient = 2.0 * math.pi / rabi if rabi > 0 else 0.0
    ta, tb = analytic_report.t, gpe_report.t
    lo = max(ta[0], tb[0]) + transient
    hi = min(ta[-1], tb[-1])
    t = tb[(tb >= lo) & (tb <= hi)]
    if t.size == 0:
        raise InvalidParameterError("the runs do not overlap after the transient exclusion")
    n_a = np.interp(t, ta, _population(analytic_report))
    n_b = np.interp(t, tb, _population(gpe_report))
    rel = np.abs(n_b / n_a - 1.0)
    table = {"t": t, "N_analytic": n_a, "N_gpe": n_b, "rel_dev": rel}
    max_dev = float(rel.max())
    result = {
        "max_dev": max_dev,
        "mean_dev": float(rel.mean()),
        "threshold": float(threshold),
        "t_excluded": float(transient),
        "n_points": int(t.size),
        "verdict": "PASS" if max_dev < threshold else "FAIL",
    }
    return table, result


def run_compare(cfg: ExperimentConfig, out_dir: Optional[Path] = None) -> RunReport:
    gpe_cfg = cfg.with_mode("gpe-1d")
    numeric = run_gpe(gpe_cfg)
    ana_cfg = cfg.with_mode("analytic-1d")
    t_end = cfg.solver.t_end
    state = analytic.AnalyticState.from_atoms(cfg.n_atoms, cfg.phys, cfg.trap, "1d")
    traj = analytic.evolve_decay(state, np.linspace(0.0, t_end, 2001), cfg.trap, cfg.phys,
                                 method=cfg.method, dimension="1d")
    model = _trajectory_report(traj, "analytic-1d")
    model.summary = {"mode": "analytic-1d", "mu0": state.mu, "n0": state.n_atoms,
                     "n_final": float(traj.n_atoms[-1]), "t_end": t_end}
    table, result = compare_runs(model, numeric, cfg.threshold, cfg.transient)
    if out_dir is not None:
        save_report(model, ana_cfg, out_dir / "analytic")
        save_report(numeric, gpe_cfg, out_dir / "gpe")
    report = RunReport(kind="compare", series=table, manifest={"parameters": numeric.parameters})
    report.summary = {"mode": "compare", **result, "rabi": cfg.trap.rabi,
                      "gpe": numeric.summary, "analytic": model.summary}
    return report


# ---------------------------------------------------------------------------
# Sweeps


def _sweep_value_si(text: str) -> float:
    try:
        return parse_frequency(text, "value")
    except ConfigError:
        try:
            return float(text)
        except ValueError:
            return math.nan


def _sweep_task(args):
    sections, source, out = args
    cfg = config_from_sections(sections, source)
    report = run_experiment(cfg, out)
    return report.summary


def run_sweep(cfg: ExperimentConfig, out_dir: Path, jobs: Optional[int] = None) -> RunReport:
    """Run ``sweep.mode`` once per value of ``sweep.parameter``.

    Each run writes to its own ``run_NNN`` directory; ``jobs > 1`` runs them
    in worker processes. Results do not depend on ``jobs``.
    """
    jobs = cfg.jobs if jobs is None else jobs
    tasks = []
    for i, value in enumerate(cfg.sweep_values):
        sub = cfg.with_value(cfg.sweep_parameter, value).with_mode(cfg.sweep_mode)
        tasks.append((sub.sections, sub.source, str(out_dir / f"run_{i:03d}")))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            summaries = list(pool.map(_sweep_task, tasks))
    else:
        summaries = [_sweep_task(t) for t in tasks]

    keys = [k for k, v in summaries[0].items() if isinstance(v, (int, float)) and not isinstance(v, bool)]
    values = np.array([_sweep_value_si(v) for v in cfg.sweep_values])
    table = {"index": np.arange(len(tasks), dtype=float), "value": values}
    for k in keys:
        table[k] = np.array([float(s.get(k, math.nan)) for s in summaries])
    if "delta_E" in table:
        table["delta_E_ratio"] = table["delta_E"] / table["delta_E"][0]
    report = RunReport(kind="sweep", series=table, manifest={"parameters": {}})
    report.summary = {
        "mode": "sweep",
        "parameter": cfg.sweep_parameter,
        "values": list(cfg.sweep_values),
        "runs": [Path(t[2]).name for t in tasks],
    }
    if "delta_E_ratio" in table:
        report.summary["delta_E_ratio"] = table["delta_E_ratio"].tolist()
    return report


# ---------------------------------------------------------------------------


def run_experiment(cfg: ExperimentConfig, out=None, write=True, jobs=None) -> RunReport:
    """Dispatch on ``cfg.mode`` and (optionally) write the run directory."""
    out_dir = resolve_output_dir(cfg, out)
    if cfg.mode in ("analytic-3d", "analytic-1d"):
        report = run_analytic(cfg)
    elif cfg.mode == "gpe-1d":
        report = run_gpe(cfg)
    elif cfg.mode == "chirp":
        report = run_chirp(cfg)
    elif cfg.mode == "compare":
        report = run_compare(cfg, out_dir if write else None)
    elif cfg.mode == "sweep":
        out_dir.mkdir(parents=True, exist_ok=True)
        report = run_sweep(cfg, out_dir, jobs)
    else:
        raise ConfigError(f"unknown mode {cfg.mode!r}")
    if write:
        _save(report, cfg, out_dir)
    return report


def _save(report, cfg, out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    if report.kind == "compare":
        write_table(out_dir / "comparison.csv", report.series,
                    {"parameters": report.parameters, "verdict": report.summary["verdict"]})
        write_json(out_dir / "summary.json", report.summary)
        write_json(out_dir / "manifest.json", _manifest(cfg, report, ["comparison.csv", "summary.json",
                                                                        "manifest.json", "analytic", "gpe"]))
    elif report.kind == "sweep":
        write_table(out_dir / "aggregate.csv", report.series, {"parameter": cfg.sweep_parameter,
                                                              "values": cfg.sweep_values})
        write_json(out_dir / "summary.json", report.summary)
        write_json(out_dir / "manifest.json", _manifest(cfg, report, ["aggregate.csv", "summary.json",
                                                                        "manifest.json", *report.summary["runs"]]))
    else:
        save_report(report, cfg, out_dir)
