"""One-dimensional multi-component Gross-Pitaevskii solver.

Components are stored in the order m = -1, 0, +1 along the first axis of
``WaveField.psi``. In the frame rotating with the rf field the per-point
Hamiltonian is

    H(x) = T + diag(E_m(x)) + hbar*Omega*(adjacent-m coupling) + U1*n(x)

with ``E_-1 = M w^2 x^2/2 - hbar*Delta0``, ``E_0 = 0`` and ``E_+1 = -E_-1``
(energies measured from the trap offset ``V_off``). Because the mean field
is the same for every component, ``exp(-i H dt/hbar)`` without the kinetic
term factors into a precomputed unitary matrix per grid point times a scalar
phase ``exp(-i U1 n dt/hbar)``.

Time stepping is Strang splitting: half kinetic step in Fourier space, full
position-space step (coupling, mean field and absorber), half kinetic step.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.fft as sfft

from . import analytic
from .errors import DomainError, InvalidParameterError, PropagationError
from .report import RunReport
from .units import PhysicalParams, TrapCoupling, parameter_record

COMPONENT_LABELS = ("N_-1", "N_0", "N_+1")

# Kinetic phase allowed at the largest grid wavenumber per full step. The
# split-step scheme for the nonlinear equation goes unstable once it exceeds pi.
MAX_KINETIC_PHASE = 2.0


@dataclass(frozen=True)
class Grid1D:
    n_points: int
    x_min: float
    x_max: float

    def __post_init__(self):
        n = self.n_points
        if n < 4 or n & (n - 1):
            raise InvalidParameterError(f"n_points must be a power of two >= 4, got {n!r}")
        if not self.x_min < self.x_max:
            raise InvalidParameterError("x_min must be below x_max")

    @classmethod
    def symmetric(cls, n_points: int, half_width: float) -> "Grid1D":
        return cls(n_points, -half_width, half_width)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.n_points, self.dx)

    def index_of(self, position: float) -> int:
        return int(np.argmin(np.abs(self.x - position)))


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    n_steps: int
    components: int = 2
    absorber_width: float = 0.0
    absorber_strength: float = 0.0
    record_every: int = 1
    detector_x: Optional[float] = None
    snapshot_times: Tuple[float, ...] = ()

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidParameterError("dt must be positive")
        if self.n_steps < 0:
            raise InvalidParameterError("n_steps must be >= 0")
        if self.components not in (2, 3):
            raise InvalidParameterError("components must be 2 or 3")
        if self.absorber_width < 0 or self.absorber_strength < 0:
            raise InvalidParameterError("absorber width and strength must be >= 0")
        if self.record_every < 1:
            raise InvalidParameterError("record_every must be >= 1")
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))

    @property
    def absorbing(self) -> bool:
        return self.absorber_width > 0 and self.absorber_strength > 0

    def check_grid(self, grid: Grid1D):
        if self.absorber_width >= grid.length / 4:
            raise InvalidParameterError("absorber width must be below a quarter of the grid length")
        if self.detector_x is not None:
            d = self.detector_x
            if not (0 < d < grid.x_max - self.absorber_width and -d > grid.x_min + self.absorber_width):
                raise InvalidParameterError("detector must lie between the trap centre and the absorber")


@dataclass
class WaveField:
    """Complex amplitudes (atoms^(1/2) m^(-1/2)) of each component at time ``t``.

    ``ejected`` counts the atoms removed from each component by the absorber.
    """

    grid: Grid1D
    psi: np.ndarray
    t: float = 0.0
    ejected: np.ndarray = field(default=None)

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=np.complex128)
        if self.psi.ndim != 2 or self.psi.shape[1] != self.grid.n_points:
            raise InvalidParameterError("psi must have shape (components, n_points)")
        if self.ejected is None:
            self.ejected = np.zeros(self.psi.shape[0])

    @property
    def components(self) -> int:
        return self.psi.shape[0]

    @property
    def densities(self) -> np.ndarray:
        return self.psi.real**2 + self.psi.imag**2

    @property
    def total_density(self) -> np.ndarray:
        return self.densities.sum(axis=0)

    @property
    def norms(self) -> np.ndarray:
        return self.densities.sum(axis=1) * self.grid.dx

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.psi.copy(), self.t, self.ejected.copy())


# ---------------------------------------------------------------------------
# Static operators


def diagonal_energies(grid: Grid1D, components: int, phys: PhysicalParams, trap: TrapCoupling) -> np.ndarray:
    trapped = 0.5 * trap.spring_constant(phys) * grid.x**2 - phys.hbar * trap.detuning0
    rows = [trapped, np.zeros_like(trapped)]
    if components == 3:
        rows.append(-trapped)
    return np.stack(rows)


def coupling_matrix(grid: Grid1D, components: int, phys: PhysicalParams, trap: TrapCoupling) -> np.ndarray:
    """Per-point Hermitian matrices without the mean field, shape (n, c, c)."""
    diag = diagonal_energies(grid, components, phys, trap)
    h = np.zeros((grid.n_points, components, components))
    idx = np.arange(components)
    h[:, idx, idx] = diag.T
    coupling = phys.hbar * trap.rabi
    for m in range(components - 1):
        h[:, m, m + 1] = coupling
        h[:, m + 1, m] = coupling
    return h


def _local_propagator(h: np.ndarray, dt: float, hbar: float) -> np.ndarray:
    # returns P[a, b, x] = exp(-i h(x) dt / hbar)[a, b]
    w, v = np.linalg.eigh(h)
    p = np.einsum("xij,xj,xkj->xik", v, np.exp(-1j * w * dt / hbar), v.conj())
    return np.ascontiguousarray(p.transpose(1, 2, 0))


def absorber_profile(grid: Grid1D, width: float, strength: float) -> np.ndarray:
    """Imaginary potential ``W(x)`` (J): cos^2 ramp rising to ``strength`` at the edges."""
    w = np.zeros(grid.n_points)
    if width <= 0 or strength <= 0:
        return w
    depth = np.minimum(grid.x - grid.x_min, grid.x_max - grid.x)
    inside = depth < width
    w[inside] = strength * np.cos(0.5 * np.pi * depth[inside] / width) ** 2
    return w


def apply_absorber(f: WaveField, cfg: SolverConfig, phys: PhysicalParams) -> WaveField:
    """Damp amplitudes by ``exp(-W dt/hbar)``; the removed norm goes to ``ejected``."""
    out = f.copy()
    if not cfg.absorbing:
        return out
    mask = np.exp(-absorber_profile(f.grid, cfg.absorber_width, cfg.absorber_strength) * cfg.dt / phys.hbar)
    before = out.norms
    out.psi *= mask
    out.ejected += before - out.norms
    return out


def stable_time_step(grid: Grid1D, phys: PhysicalParams, kinetic_phase: float = MAX_KINETIC_PHASE) -> float:
    """Largest ``dt`` keeping the kinetic phase at the Nyquist wavenumber below ``kinetic_phase``."""
    k_max = np.pi / grid.dx
    return kinetic_phase * 2.0 * phys.mass / (phys.hbar * k_max**2)


# ---------------------------------------------------------------------------
# Solver


class SplitStepSolver:
    """Strang-split propagator for a fixed grid, configuration and parameters."""

    def __init__(self, grid: Grid1D, cfg: SolverConfig, phys: PhysicalParams, trap: TrapCoupling):
        cfg.check_grid(grid)
        self.grid, self.cfg, self.phys, self.trap = grid, cfg, phys, trap
        self.u1 = phys.interaction("1d")
        hbar, dt = phys.hbar, cfg.dt
        self.k2 = grid.k**2
        kinetic_rate = hbar * self.k2 / (2.0 * phys.mass)
        self.half_kinetic = np.exp(-0.5j * kinetic_rate * dt)
        self.full_kinetic = self.half_kinetic**2
        self.hamiltonian = coupling_matrix(grid, cfg.components, phys, trap)
        self.propagator = _local_propagator(self.hamiltonian, dt, hbar)
        self.mean_field_rate = self.u1 * dt / hbar

        w = absorber_profile(grid, cfg.absorber_width, cfg.absorber_strength)
        edge = np.nonzero(w > 0)[0]
        self._abs_index = edge
        self._abs_mask = np.exp(-w[edge] * dt / hbar)
        self._abs_loss = 1.0 - self._abs_mask**2

        self._det_index = None
        if cfg.detector_x is not None:
            self._det_index = (grid.index_of(cfg.detector_x), grid.index_of(-cfg.detector_x))

    # -- kernels operating on raw arrays ------------------------------------

    def _kinetic(self, psi, factor):
        return sfft.ifft(sfft.fft(psi, axis=1) * factor, axis=1, overwrite_x=True)

    def _position_step(self, psi, ejected):
        dens = psi.real**2 + psi.imag**2
        phase = np.exp(-1j * self.mean_field_rate * dens.sum(axis=0))
        p = self.propagator
        nc = psi.shape[0]
        new = np.empty_like(psi)
        for a in range(nc):
            acc = p[a, 0] * psi[0]
            for b in range(1, nc):
                acc += p[a, b] * psi[b]
            new[a] = acc * phase
        if self._abs_index.size:
            edge = new[:, self._abs_index]
            ejected += (edge.real**2 + edge.imag**2) @ self._abs_loss * self.grid.dx
            new[:, self._abs_index] = edge * self._abs_mask
        return new

    def _check(self, psi, step):
        if not np.isfinite(psi).all():
            t = step * self.cfg.dt
            raise PropagationError(f"non-finite amplitude by step {step} (t={t:.6g} s)", time=t, step=step)

    # -- public API ---------------------------------------------------------

    def step(self, f: WaveField) -> WaveField:
        ejected = f.ejected.copy()
        psi = self._kinetic(f.psi, self.half_kinetic)
        psi = self._position_step(psi, ejected)
        psi = self._kinetic(psi, self.half_kinetic)
        self._check(psi, 1)
        return WaveField(self.grid, psi, f.t + self.cfg.dt, ejected)

    def advance(self, f: WaveField, n_steps: int, first_step: int = 0) -> WaveField:
        """Take ``n_steps`` steps, merging adjacent half kinetic steps.

        ``first_step`` only offsets the step index reported on failure.
        """
        if n_steps <= 0:
            return f.copy()
        ejected = f.ejected.copy()
        psi = self._kinetic(f.psi, self.half_kinetic)
        for i in range(n_steps):
            psi = self._position_step(psi, ejected)
            psi = self._kinetic(psi, self.full_kinetic if i < n_steps - 1 else self.half_kinetic)
        self._check(psi, first_step + n_steps)
        return WaveField(self.grid, psi, f.t + n_steps * self.cfg.dt, ejected)

    # -- observables --------------------------------------------------------

    def current(self, psi_component):
        """Probability current ``(hbar/M) Im(psi* d psi/dx)`` in atoms/s."""
        dpsi = sfft.ifft(1j * self.grid.k * sfft.fft(psi_component))
        return self.phys.hbar / self.phys.mass * np.imag(np.conj(psi_component) * dpsi)

    def detector(self, f: WaveField):
        """Outgoing m=0 flux through both detectors and the mean outward speed."""
        if self._det_index is None:
            return math.nan, math.nan
        right, left = self._det_index
        psi0 = f.psi[1]
        j = self.current(psi0)
        n = psi0.real**2 + psi0.imag**2
        flux = j[right] - j[left]
        n_sum = n[right] + n[left]
        speed = flux / n_sum if n_sum > 0 else 0.0
        return float(flux), float(speed)

    def chemical_potential(self, f: WaveField) -> float:
        """Energy per trapped atom of ``T + V + U1 n`` (J, relative to ``V_off``)."""
        psi = f.psi[0]
        n_trapped = float(np.sum(psi.real**2 + psi.imag**2) * self.grid.dx)
        if n_trapped <= 0:
            return math.nan
        kinetic = self.phys.hbar**2 * self.k2 / (2.0 * self.phys.mass)
        t_psi = sfft.ifft(kinetic * sfft.fft(psi))
        v = 0.5 * self.trap.spring_constant(self.phys) * self.grid.x**2 + self.u1 * f.total_density
        e = np.sum(np.conj(psi) * t_psi).real + np.sum(v * (psi.real**2 + psi.imag**2))
        return float(e * self.grid.dx / n_trapped)

    def effective_potential(self, f: WaveField) -> np.ndarray:
        """``V_-1(x) - V_off + U1 |psi_-1|^2`` in J."""
        return 0.5 * self.trap.spring_constant(self.phys) * self.grid.x**2 + self.u1 * f.densities[0]

    def run(self, f0: WaveField) -> RunReport:
        cfg = self.cfg
        if f0.components != cfg.components:
            raise InvalidParameterError(f"field has {f0.components} components, config wants {cfg.components}")
        snap_steps = {}
        for ts in cfg.snapshot_times:
            s = int(round((ts - f0.t) / cfg.dt))
            if 0 <= s <= cfg.n_steps:
                snap_steps.setdefault(s, ts)
        marks = sorted(set(range(0, cfg.n_steps + 1, cfg.record_every)) | {cfg.n_steps} | set(snap_steps))

        rows = []
        profiles = {"x": self.grid.x.copy()}
        snapshots = []
        f = f0.copy()
        current_step = 0
        for mark in marks:
            f = self.advance(f, mark - current_step, current_step)
            current_step = mark
            norms = f.norms
            flux, speed = self.detector(f)
            padded = list(norms) + [0.0] * (3 - len(norms))
            rows.append([f.t, *padded, flux, speed, self.chemical_potential(f), float(f.ejected.sum())])
            if mark in snap_steps:
                profiles[f"veff_t={snap_steps[mark]:.6g}"] = self.effective_potential(f)
                snapshots.append(f.copy())

        table = np.array(rows)
        columns = ("t", *COMPONENT_LABELS, "flux", "v_out", "mu", "ejected")
        series = {name: table[:, i].copy() for i, name in enumerate(columns)}
        manifest = {
            "parameters": parameter_record(self.phys, self.trap, n_atoms=float(f0.norms.sum() + f0.ejected.sum())),
            "grid": {"n_points": self.grid.n_points, "x_min": self.grid.x_min, "x_max": self.grid.x_max},
            "solver": solver_config_record(cfg),
        }
        return RunReport(kind="gpe-1d", series=series, manifest=manifest, profiles=profiles, snapshots=snapshots)


def potential_flatness(veff, x, phys: PhysicalParams, trap: TrapCoupling, interior=0.8):
    """Mean and relative spread (std/mean) of ``veff`` inside the condensate.

    The condensate radius is taken from the central level,
    ``R = sqrt(2 veff(0) / (M omega_T^2))``, and only ``|x| < interior * R``
    is used.
    """
    veff = np.asarray(veff)
    x = np.asarray(x)
    centre = float(np.interp(0.0, x, veff))
    if centre <= 0:
        raise DomainError("effective potential has no condensate plateau")
    radius = math.sqrt(2.0 * centre / trap.spring_constant(phys))
    inside = np.abs(x) < interior * radius
    if inside.sum() < 3:
        raise DomainError("condensate is not resolved on the grid")
    mean = float(veff[inside].mean())
    return mean, float(veff[inside].std() / mean)


def solver_config_record(cfg: SolverConfig) -> dict:
    return {
        "dt": cfg.dt,
        "n_steps": cfg.n_steps,
        "components": cfg.components,
        "absorber_width": cfg.absorber_width,
        "absorber_strength": cfg.absorber_strength,
        "record_every": cfg.record_every,
        "detector_x": cfg.detector_x,
        "snapshot_times": list(cfg.snapshot_times),
    }


@lru_cache(maxsize=8)
def _cached_solver(grid, cfg, phys, trap):
    return SplitStepSolver(grid, cfg, phys, trap)


def step(f: WaveField, cfg: SolverConfig, phys: PhysicalParams, trap: TrapCoupling) -> WaveField:
    """Advance ``f`` by one time step ``cfg.dt``."""
    return _cached_solver(f.grid, cfg, phys, trap).step(f)


def run(f0: WaveField, cfg: SolverConfig, phys: PhysicalParams, trap: TrapCoupling) -> RunReport:
    return _cached_solver(f0.grid, cfg, phys, trap).run(f0)


# ---------------------------------------------------------------------------
# Initial state


def thomas_fermi_field(n_atoms, grid: Grid1D, phys: PhysicalParams, trap: TrapCoupling, components=2):
    mu = analytic.mu_from_n(n_atoms, phys, trap, "1d")
    radius = analytic.tf_radius(mu, phys, trap)
    if radius >= min(-grid.x_min, grid.x_max):
        raise InvalidParameterError(
            f"grid [{grid.x_min:.3g}, {grid.x_max:.3g}] m does not contain the TF radius {radius:.3g} m"
        )
    psi = np.zeros((components, grid.n_points), dtype=np.complex128)
    psi[0] = np.sqrt(analytic.tf_density(grid.x, mu, phys, trap, "1d"))
    return WaveField(grid, psi)


def _stationary_residual(psi, grid, phys, trap, u1):
    kinetic = phys.hbar**2 * grid.k**2 / (2.0 * phys.mass)
    v = 0.5 * trap.spring_constant(phys) * grid.x**2 + u1 * (psi.real**2 + psi.imag**2)
    h_psi = sfft.ifft(kinetic * sfft.fft(psi)) + v * psi
    norm = np.sum(np.abs(psi) ** 2)
    mu = float(np.real(np.sum(np.conj(psi) * h_psi)) / norm)
    return mu, h_psi - mu * psi


def ground_state_residual(f: WaveField, phys: PhysicalParams, trap: TrapCoupling, interior=0.9):
    """Relative residual of the stationary GPE on the inner part of the cloud.

    Returns ``(mu, max|H psi - mu psi| / max|mu psi|)`` over ``|x| < interior * R_TF``.
    """
    u1 = phys.interaction("1d")
    psi = f.psi[0]
    mu, res = _stationary_residual(psi, f.grid, phys, trap, u1)
    radius = analytic.tf_radius(max(mu, 0.0), phys, trap)
    inside = np.abs(f.grid.x) < interior * radius
    return mu, float(np.max(np.abs(res[inside])) / np.max(np.abs(mu * psi)))


def _imaginary_time_stage(psi, n_atoms, grid, phys, trap, u1, dtau, tol, min_steps, max_steps):
    hbar = phys.hbar
    half = np.exp(-0.5 * hbar * grid.k**2 / (2.0 * phys.mass) * dtau)
    v = 0.5 * trap.spring_constant(phys) * grid.x**2
    dx = grid.dx
    mu_prev = math.nan
    for i in range(max_steps):
        # mean field from the start of the step keeps the fixed point accurate to O(dtau^2)
        mean_field = u1 * (psi.real**2 + psi.imag**2)
        psi = sfft.ifft(sfft.fft(psi) * half)
        psi = psi * np.exp(-(v + mean_field) * dtau / hbar)
        psi = sfft.ifft(sfft.fft(psi) * half)
        norm = float(np.sum(psi.real**2 + psi.imag**2) * dx)
        mu = -hbar * math.log(norm / n_atoms) / (2.0 * dtau)
        psi *= math.sqrt(n_atoms / norm)
        if i >= min_steps and abs(mu - mu_prev) < tol * abs(mu):
            return psi, i + 1
        mu_prev = mu
    return psi, max_steps


def prepare_ground_state(
    n_atoms,
    grid: Grid1D,
    phys: PhysicalParams,
    trap: TrapCoupling,
    method: str = "imaginary-time",
    components: int = 2,
    residual_tol: float = 1e-6,
    drift_tol: float = 1e-10,
    max_stages: int = 8,
    interior: float = 0.9,
    relax_time: float = 5.0,
) -> WaveField:
    """Trapped m=-1 condensate with ``n_atoms`` atoms and no rf coupling.

    ``"tf-profile"`` returns the Thomas-Fermi amplitude. ``"imaginary-time"``
    relaxes it with split-step imaginary-time propagation, renormalising
    every step, until the chemical-potential drift per step is below
    ``drift_tol`` (scaled down in proportion to the step in later stages).
    The imaginary step is divided by 4 between stages until the stationary
    residual on ``|x| < interior * R_TF`` drops below ``residual_tol``. Each
    stage runs for at least ``relax_time / omega_T`` of imaginary time.
    """
    if not n_atoms > 0:
        raise DomainError("n_atoms must be positive")
    f = thomas_fermi_field(n_atoms, grid, phys, trap, components)
    if method == "tf-profile":
        return f
    if method != "imaginary-time":
        raise InvalidParameterError(f"unknown ground-state method {method!r}")

    u1 = phys.interaction("1d")
    mu = analytic.mu_from_n(n_atoms, phys, trap, "1d")
    dtau0 = dtau = 0.3 * phys.hbar / mu
    psi = f.psi[0]
    for _ in range(max_stages):
        min_steps = int(math.ceil(relax_time / (trap.omega_T * dtau)))
        # drift per unit imaginary time, so shorter steps do not stop early
        tol = drift_tol * dtau / dtau0
        psi, _ = _imaginary_time_stage(psi, n_atoms, grid, phys, trap, u1, dtau, tol, min_steps, 1_000_000)
        f.psi[0] = psi
        _, residual = ground_state_residual(f, phys, trap, interior)
        if residual < residual_tol:
            break
        dtau /= 4.0
    f.psi[0] = psi.real.astype(np.complex128)
    return f


# ---------------------------------------------------------------------------
# Default set-up and comparison with the analytic model


def default_grid(n_atoms, phys: PhysicalParams, trap: TrapCoupling, n_points=4096, half_width_tf=8.0) -> Grid1D:
    mu = analytic.mu_from_n(n_atoms, phys, trap, "1d")
    return Grid1D.symmetric(n_points, half_width_tf * analytic.tf_radius(mu, phys, trap))


def default_config(
    n_atoms,
    grid: Grid1D,
    phys: PhysicalParams,
    trap: TrapCoupling,
    t_end: float,
    components=2,
    dt=None,
    n_records=400,
    absorber_width_tf=2.0,
    absorber_strength_rate=2.0e4,
    detector_tf=4.0,
    snapshot_times: Sequence[float] = (),
) -> SolverConfig:
    """Solver settings sized from the Thomas-Fermi radius of the initial cloud.

    ``absorber_strength_rate`` is the peak imaginary potential in rad/s
    (multiplied by hbar).
    """
    radius = analytic.tf_radius(analytic.mu_from_n(n_atoms, phys, trap, "1d"), phys, trap)
    if dt is None:
        dt = stable_time_step(grid, phys)
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    dt = t_end / n_steps if n_steps else dt
    return SolverConfig(
        dt=dt,
        n_steps=n_steps,
        components=components,
        absorber_width=absorber_width_tf * radius,
        absorber_strength=absorber_strength_rate * phys.hbar,
        record_every=max(1, n_steps // n_records),
        detector_x=detector_tf * radius,
        snapshot_times=tuple(snapshot_times),
    )


def compare_to_analytic(report: RunReport, traj: "analytic.DecayTrajectory", exclude_transient=None):
    """Relative deviation of the numerical trapped population from the model.

    Points with ``t < 2 pi / Omega`` are excluded as the Rabi transient
    unless ``exclude_transient`` (s) is given. Returns a dict with
    ``max_dev``, ``mean_dev``, ``flux_mean_dev`` and ``t_excluded``.
    """
    if traj.dimension != "1d":
        raise InvalidParameterError("the numerical solver is one-dimensional; compare with a 1d trajectory")
    mismatched = _mismatched(report.parameters, traj_parameters(traj))
    if mismatched:
        raise InvalidParameterError(f"parameters differ between runs: {', '.join(mismatched)}")
    rabi = report.parameters.get("rabi", 0.0)
    if exclude_transient is None:
        exclude_transient = 2.0 * math.pi / rabi if rabi > 0 else 0.0

    t = report.series["t"]
    n_num = report.series["N_-1"]
    n_ana = np.interp(t, traj.t, traj.n_atoms)
    keep = t >= t[0] + exclude_transient
    if not keep.any():
        raise DomainError("the run is shorter than the transient exclusion window")
    dev = np.abs(n_num[keep] / n_ana[keep] - 1.0)

    flux_ana = np.interp(t, traj.t, traj.flux)
    flux_num = report.series["flux"]
    fkeep = keep & (flux_ana > 0) & np.isfinite(flux_num)
    flux_dev = float(np.mean(np.abs(flux_num[fkeep] / flux_ana[fkeep] - 1.0))) if fkeep.any() else math.nan
    return {
        "max_dev": float(dev.max()),
        "mean_dev": float(dev.mean()),
        "flux_mean_dev": flux_dev,
        "t_excluded": float(exclude_transient),
        "n_points": int(keep.sum()),
    }


def traj_parameters(traj) -> dict:
    return getattr(traj, "meta", {}) or {}


def _mismatched(a: dict, b: dict, rel_tol=1e-9):
    out = []
    for key in sorted(set(a) & set(b)):
        va, vb = a[key], b[key]
        if va is None or vb is None:
            if va is not vb:
                out.append(key)
        elif isinstance(va, (int, float)) and isinstance(vb, (int, float)):
            if not math.isclose(va, vb, rel_tol=rel_tol, abs_tol=0.0):
                out.append(key)
        elif va != vb:
            out.append(key)
    return out


# ---------------------------------------------------------------------------
# Snapshot files


def write_snapshot(path, f: WaveField, metadata: Optional[dict] = None):
    """CSV of x and Re/Im of each component, preceded by a ``#`` JSON header line."""
    header = {
        "grid": {"n_points": f.grid.n_points, "x_min": f.grid.x_min, "x_max": f.grid.x_max},
        "t": f.t,
        "components": f.components,
        "ejected": [float(e) for e in f.ejected],
    }
    if metadata:
        header["metadata"] = metadata
    cols = ["x"]
    for label in ("m-1", "m0", "m+1")[: f.components]:
        cols += [f"re_{label}", f"im_{label}"]
    data = [f.grid.x]
    for c in range(f.components):
        data += [f.psi[c].real, f.psi[c].imag]
    table = np.column_stack(data)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write(",".join(cols) + "\n")
        np.savetxt(fh, table, delimiter=",", fmt="%.17g")


def read_snapshot(path) -> Tuple[WaveField, dict]:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise InvalidParameterError(f"{path}: missing JSON header line")
        header = json.loads(first[2:])
        fh.readline()
        table = np.loadtxt(fh, delimiter=",", ndmin=2)
    g = header["grid"]
    grid = Grid1D(int(g["n_points"]), float(g["x_min"]), float(g["x_max"]))
    nc = int(header["components"])
    psi = np.array([table[:, 1 + 2 * c] + 1j * table[:, 2 + 2 * c] for c in range(nc)])
    return WaveField(grid, psi, float(header["t"]), np.array(header["ejected"], dtype=float)), header
