"""Acceptance criteria 1-7.

Each test logs one PASS/FAIL line (shown in the "acceptance criteria" section
of the pytest summary) before asserting. Criteria 4 and 5 run 4096-point GPE
simulations of several minutes each and carry the ``slow`` marker.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from atomlaser import analytic as an
from atomlaser import gpe, runner
from atomlaser.config import load_preset, preset_names
from atomlaser.numerics import rk4_integrate
from atomlaser.units import PhysicalParams, TrapCoupling

from conftest import N0, OMEGA_T, record_criterion

RESULTS = Path(__file__).resolve().parent.parent / "results"


@pytest.fixture(scope="module")
def reference():
    phys = PhysicalParams()
    trap = TrapCoupling(omega_T=OMEGA_T, detuning0=3500.0, rabi=20.0)
    state = an.AnalyticState.from_atoms(N0, phys, trap)
    traj = an.evolve_decay(state, an.default_time_grid(trap, phys, state.mu), trap, phys)
    return phys, trap, state, traj


def test_1_output_velocity(reference):
    phys, trap, state, traj = reference
    v, _ = an.velocity_width(traj, an.rate_set(trap, phys, state.mu), phys)
    dev = abs(v / 0.0131 - 1)
    ok = record_criterion("1", dev < 0.03, f"<v> = {100 * v:.4f} cm/s, {100 * dev:.2f}% from 1.31 cm/s (tol 3%)")
    assert ok


def test_2_velocity_width(reference):
    phys, trap, state, traj = reference
    _, rel = an.velocity_width(traj, an.rate_set(trap, phys, state.mu), phys)
    ok = record_criterion("2", 3e-7 <= rel <= 3e-6, f"dv/<v> = {rel:.3e} (window [3e-7, 3e-6])")
    assert ok


def test_3_steady_state(reference):
    phys, trap, state, traj = reference
    d = phys.hbar * trap.detuning0
    mu_inf, _ = an.steady_state(trap, phys, state.mu)
    late = an.evolve_decay(state, [0.0, 400.0], trap, phys).mu[-1]
    late_rk4 = an.evolve_decay(state, np.linspace(0.0, 400.0, 40001), trap, phys, "ode-rk4").mu[-1]
    t_ss = traj.steady_state_time(0.05)
    exact = mu_inf == d and abs(late / d - 1) <= 4 * np.finfo(float).eps and abs(late_rk4 / d - 1) < 1e-13
    ok = record_criterion(
        "3", exact and 15.0 <= t_ss <= 40.0,
        f"mu_inf/(hbar Delta0) - 1 = {mu_inf / d - 1:.1e} (trajectory at 400 s: {late / d - 1:.1e}, "
        f"RK4: {late_rk4 / d - 1:.1e}); flux < 5% at t = {t_ss:.2f} s (window [15, 40] s)",
    )
    assert ok


@pytest.mark.slow
def test_4_gpe_vs_analytic(tmp_path):
    cfg = load_preset("compare-fast")
    rep = runner.run_experiment(cfg, tmp_path)
    s = rep.summary
    ok = s["max_dev"] < 0.05 and cfg.trap.rabi < 0.2 * cfg.trap.omega_T
    record_criterion(
        "4", ok,
        f"desk run Omega = {cfg.trap.rabi:g}/s, {s['gpe']['n_steps']} steps to {s['gpe']['t_end']:.2f} s: "
        f"max |dN/N| = {100 * s['max_dev']:.2f}% (tol 5%), bookkeeping {s['gpe']['bookkeeping_error']:.1e}",
    )
    recorded = RESULTS / "compare-weak" / "summary.json"
    if recorded.exists():
        weak = json.loads(recorded.read_text())
        record_criterion(
            "4 (recorded Omega = 20/s run)", weak["max_dev"] < 0.05,
            f"t_end = {weak['gpe']['t_end']:.1f} s, max |dN/N| = {100 * weak['max_dev']:.2f}% "
            f"from {recorded.relative_to(RESULTS.parent)}",
        )
        assert weak["max_dev"] < 0.05
    assert ok


@pytest.mark.slow
def test_5_flat_potential(tmp_path):
    rep = runner.run_experiment(load_preset("flat-potential"), tmp_path)
    s = rep.summary
    f0, f1 = s["veff_flatness_t=0"], s["veff_flatness_t=0.67"]
    m0, m1 = s["veff_mean_t=0"], s["veff_mean_t=0.67"]
    ok = f0 < 0.05 and f1 < 0.05 and m1 < m0
    record_criterion(
        "5", ok,
        f"std/mean of V_eff: {100 * f0:.3f}% at 0 s, {100 * f1:.3f}% at 0.67 s (tol 5%); "
        f"level lowered by {100 * (1 - m1 / m0):.2f}%",
    )
    assert ok


def _slope(f, x, h=1e-4):
    return (math.log(f(x * (1 + h))) - math.log(f(x * (1 - h)))) / (math.log(1 + h) - math.log(1 - h))


def test_6_property_suite(reference):
    phys, trap, state, traj = reference
    checks = {}

    # transient rate at t = 0 against the perturbative rate, both dimensions
    checks["rate prefactor identity"] = max(
        abs(an.gamma_of_t(0.0, trap, phys.with_changes(interaction_U1=1e-41), dim)
            / an.gamma_perturbative(trap, phys, dim) - 1) for dim in ("1d", "3d")
    ), 1e-12

    # closed form against an adaptive ODE solve
    d = phys.hbar * trap.detuning0
    alpha = an.decay_coefficient(trap, phys)
    t = np.linspace(0.0, 20.0, 21)
    sol = solve_ivp(lambda _, m: -alpha * (m - d) / m**1.5, (0, 20), [state.mu], t_eval=t, rtol=1e-12, atol=1e-45)
    implicit = an.evolve_decay(state, t, trap, phys).mu
    checks["ODE vs implicit solution"] = float(np.max(np.abs(implicit / sol.y[0] - 1))), 1e-6

    # energy-width exponents in N0, Omega, Delta0
    def width(n=N0, rabi=20.0, det=3500.0):
        tc = trap.with_changes(rabi=rabi, detuning0=det)
        return an.energy_width(tc, phys, an.mu_from_n(n, phys, tc))[1]

    slopes = (_slope(lambda n: width(n=n), N0), _slope(lambda r: width(rabi=r), 20.0),
              _slope(lambda x: width(det=x), 3500.0))
    checks["scaling exponents"] = max(abs(a - b) for a, b in zip(slopes, (-0.6, 2.0, 0.5))), 1e-6

    # split-step solver on a 1024-point grid at strong coupling
    phys1 = phys.with_changes(interaction_U1=an.matched_interaction_1d(N0, phys, trap))
    strong = trap.with_changes(rabi=300.0)
    grid = gpe.default_grid(N0, phys1, strong, n_points=1024)
    f0 = gpe.prepare_ground_state(N0, grid, phys1, strong)
    dt0 = gpe.stable_time_step(grid, phys1)
    closed = gpe.SplitStepSolver(grid, gpe.SolverConfig(dt=dt0, n_steps=1000), phys1, strong)
    checks["unitarity per 1000 steps"] = abs(closed.advance(f0, 1000).norms.sum() / N0 - 1), 1e-10

    t_end = 0.0025
    n = int(round(t_end / dt0))
    pops = []
    for div in (1, 2, 4):
        cfg = gpe.default_config(N0, grid, phys1, strong, t_end, dt=t_end / (n * div))
        pops.append(gpe.SplitStepSolver(grid, cfg, phys1, strong).advance(f0, n * div).norms[0])
    ratio = abs(pops[0] - pops[1]) / abs(pops[1] - pops[2])
    checks["split-step order (halving ratio)"] = math.log2(ratio), (1.6, 2.4)

    e = [abs(rk4_integrate(lambda _, y: -y, 1.0, np.linspace(0, 1, m + 1))[-1] - math.exp(-1)) for m in (20, 40)]
    checks["RK4 order"] = math.log2(e[0] / e[1]), (3.7, 4.3)

    rep = gpe.run(f0, gpe.default_config(N0, grid, phys1, strong, 0.05), phys1, strong)
    s = rep.series
    total = s["N_-1"] + s["N_0"] + s["N_+1"] + s["ejected"]
    checks["bookkeeping with absorber"] = float(np.max(np.abs(total / N0 - 1))), 1e-8

    failed = []
    parts = []
    for name, (value, tol) in checks.items():
        good = tol[0] <= value <= tol[1] if isinstance(tol, tuple) else value < tol
        parts.append(f"{name} {value:.3g}")
        if not good:
            failed.append(name)
    ok = record_criterion("6", not failed, "; ".join(parts) + (f"  failing: {failed}" if failed else ""))
    assert ok


def _truncate(cfg):
    """Presets that run the GPE are cut to 200 time steps."""
    if cfg.mode in ("gpe-1d", "compare"):
        grid = gpe.default_grid(cfg.n_atoms, cfg.phys, cfg.trap, cfg.solver.n_points, cfg.solver.half_width_tf)
        t_end = 200 * gpe.stable_time_step(grid, cfg.phys)
        cfg = cfg.with_value("solver.t_end", repr(t_end)).with_value("solver.snapshot_times", "")
        if cfg.mode == "compare":
            cfg = cfg.with_value("compare.transient", "0")
    return cfg


def test_7_determinism(tmp_path):
    differing = []
    compared = 0
    for name in preset_names():
        cfg = _truncate(load_preset(name))
        for run in ("a", "b"):
            runner.run_experiment(cfg, tmp_path / name / run, jobs=1 if run == "a" else None)
        for path in sorted((tmp_path / name / "a").rglob("*.csv")):
            compared += 1
            twin = tmp_path / name / "b" / path.relative_to(tmp_path / name / "a")
            if path.read_bytes() != twin.read_bytes():
                differing.append(str(path.relative_to(tmp_path)))
    ok = record_criterion("7", not differing and compared > 0,
                          f"{compared} CSV files from {len(preset_names())} presets, byte-identical on rerun"
                          if not differing else f"differing: {differing}")
    assert ok
