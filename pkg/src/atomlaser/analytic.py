"""Quasi-stationary Thomas-Fermi model of a weakly output-coupled condensate.

The trapped m=-1 cloud keeps its Thomas-Fermi shape while its atom number
decays. Atoms leave through a thin shell where the rf field is resonant, at
a rate proportional to the condensate density on that shell. Closing these
two relations gives a scalar ODE for the chemical potential,

    d mu / dt = -alpha * (mu - hbar*Delta0) / mu**p,

with ``p = 3/2`` for a 3D isotropic trap and ``p = 1/2`` for the 1D
analogue (two resonance points at +-x_res instead of a shell). The 3D and
1D prefactors are

    3D:  Gamma = 8 pi^2 hbar Omega^2 sqrt(2 hbar Delta0) / (M w^2)^(3/2)
         alpha = 3 Gamma (M w^2)^(3/2) / (2^(7/2) pi)
    1D:  Gamma = 4 pi Omega^2 / Delta'(x_res) = 4 pi hbar Omega^2 / sqrt(2 hbar Delta0 M w^2)
         alpha = Gamma sqrt(M w^2) / (2 sqrt 2) = pi hbar Omega^2 / sqrt(hbar Delta0)

All energies are in J, times in s, frequencies in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    ChirpExhaustedError,
    DegenerateOutputError,
    DomainError,
    InvalidParameterError,
    NoResonanceError,
)
from .numerics import RootBracket, artanh_branch, bessel_j0, find_root, rk4_integrate
from .units import PhysicalParams, TrapCoupling, parameter_record

DIMENSIONS = ("1d", "3d")
METHODS = ("ode-rk4", "implicit")

# relative gap kept between the root bracket and the resonance energy
_BRACKET_EPS = 1e-12


def _check_dimension(dimension):
    if dimension not in DIMENSIONS:
        raise InvalidParameterError(f"dimension must be one of {DIMENSIONS}, got {dimension!r}")


def _mu_exponent(dimension):
    return 1.5 if dimension == "3d" else 0.5


def _interaction(phys, dimension):
    u = phys.interaction(dimension)
    if u <= 0:
        raise InvalidParameterError("Thomas-Fermi relations need a positive interaction constant")
    return u


@dataclass(frozen=True)
class AnalyticState:
    t: float
    mu: float
    n_atoms: float

    @classmethod
    def from_atoms(cls, n_atoms, phys, trap, dimension="3d", t=0.0):
        return cls(t=float(t), mu=mu_from_n(n_atoms, phys, trap, dimension), n_atoms=float(n_atoms))

    @classmethod
    def from_mu(cls, mu, phys, trap, dimension="3d", t=0.0):
        return cls(t=float(t), mu=float(mu), n_atoms=n_from_mu(mu, phys, trap, dimension))


@dataclass(frozen=True)
class RateSet:
    gamma: float
    alpha: float
    gamma_pop: float
    delta_E: float
    r_res: float


@dataclass
class DecayTrajectory:
    """Time series of the decaying condensate and its output beam.

    ``detuning`` is the centre detuning (rad/s) in force at each time; it is
    constant unless an rf chirp was applied. ``flag`` marks degenerate runs,
    e.g. ``"resonance-outside-condensate"``.
    """

    t: np.ndarray
    mu: np.ndarray
    n_atoms: np.ndarray
    flux: np.ndarray
    velocity: np.ndarray
    detuning: np.ndarray
    dimension: str
    method: str
    flag: Optional[str] = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def states(self) -> List[AnalyticState]:
        return [AnalyticState(float(t), float(m), float(n)) for t, m, n in zip(self.t, self.mu, self.n_atoms)]

    def steady_state_time(self, fraction=0.05):
        """First time the flux drops below ``fraction`` of its initial value."""
        if self.flux[0] <= 0:
            return float(self.t[0])
        below = np.nonzero(self.flux < fraction * self.flux[0])[0]
        if below.size == 0:
            return math.inf
        return float(self.t[below[0]])


# ---------------------------------------------------------------------------
# Thomas-Fermi cloud


def tf_radius(mu, phys: PhysicalParams, trap: TrapCoupling):
    if mu < 0:
        raise DomainError(f"chemical potential must be >= 0, got {mu!r}")
    return math.sqrt(2.0 * mu / trap.spring_constant(phys))


def tf_density(r, mu, phys: PhysicalParams, trap: TrapCoupling, dimension="3d"):
    """Thomas-Fermi density ``max[(mu - M w^2 r^2 / 2)/U, 0]``.

    ``r`` is the distance from the trap centre (may be an array). The trap
    offset ``V_off`` is measured out of ``mu``.
    """
    _check_dimension(dimension)
    if mu < 0:
        raise DomainError(f"chemical potential must be >= 0, got {mu!r}")
    u = _interaction(phys, dimension)
    r = np.asarray(r, dtype=float)
    n = np.maximum(mu - 0.5 * trap.spring_constant(phys) * r**2, 0.0) / u
    return float(n) if n.ndim == 0 else n


def n_from_mu(mu, phys: PhysicalParams, trap: TrapCoupling, dimension="3d"):
    _check_dimension(dimension)
    if mu < 0:
        raise DomainError(f"chemical potential must be >= 0, got {mu!r}")
    u = _interaction(phys, dimension)
    k = trap.spring_constant(phys)
    if dimension == "3d":
        return 4.0 * math.pi / (15.0 * u) * (2.0 * mu) ** 2.5 / k**1.5
    return 4.0 / (3.0 * u) * mu * math.sqrt(2.0 * mu / k)


def mu_from_n(n_atoms, phys: PhysicalParams, trap: TrapCoupling, dimension="3d"):
    _check_dimension(dimension)
    if not n_atoms > 0:
        raise DomainError(f"atom number must be positive, got {n_atoms!r}")
    u = _interaction(phys, dimension)
    k = trap.spring_constant(phys)
    if dimension == "3d":
        return 0.5 * (15.0 * n_atoms * u * k**1.5 / (4.0 * math.pi)) ** 0.4
    return (3.0 * n_atoms * u * math.sqrt(k) / (4.0 * math.sqrt(2.0))) ** (2.0 / 3.0)


def matched_interaction_1d(n_atoms, phys: PhysicalParams, trap: TrapCoupling):
    """1D coupling constant (J m) giving the same ``mu`` as the 3D cloud."""
    mu = mu_from_n(n_atoms, phys, trap, "3d")
    return 4.0 / (3.0 * n_atoms) * mu * math.sqrt(2.0 * mu / trap.spring_constant(phys))


# ---------------------------------------------------------------------------
# Resonance and rates


def _detuning(trap, detuning):
    d = trap.detuning0 if detuning is None else detuning
    if not d > 0:
        raise NoResonanceError(f"centre detuning must be positive for a resonance point, got {d!r}")
    return d


def resonance_radius(trap: TrapCoupling, phys: PhysicalParams, detuning=None) -> Tuple[float, float]:
    """Radius where ``hbar*Delta(r) = 0`` and the slope ``|Delta'(r_res)|``.

    Returns ``(r_res, 2*Delta0/r_res)``.
    """
    d = _detuning(trap, detuning)
    r_res = math.sqrt(2.0 * phys.hbar * d / trap.spring_constant(phys))
    return r_res, 2.0 * d / r_res


def local_detuning(r, trap: TrapCoupling, phys: PhysicalParams):
    """``Delta(r) = Delta0 - M w^2 r^2 / (2 hbar)`` in rad/s."""
    return trap.detuning0 - 0.5 * trap.spring_constant(phys) * np.asarray(r, dtype=float) ** 2 / phys.hbar


def rabi_output_density(r, t, trap: TrapCoupling, phys: PhysicalParams, mu0, dimension="3d"):
    """Untrapped density after a time ``t`` of coupling, kinetic energy neglected."""
    if t < 0:
        raise DomainError("t must be >= 0")
    delta = local_detuning(r, trap, phys)
    omega = trap.rabi
    gen2 = delta**2 + 4.0 * omega**2
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(gen2 > 0, 4.0 * omega**2 * np.sin(0.5 * np.sqrt(gen2) * t) ** 2 / gen2, 0.0)
    out = frac * tf_density(r, mu0, phys, trap, dimension)
    return float(out) if np.ndim(out) == 0 else out


def gamma_of_t(t, trap: TrapCoupling, phys: PhysicalParams, dimension="3d"):
    """Transition rate during the initial Rabi transient (no losses).

    3D: ``8 pi^2 r_res^2 Omega^2 / Delta'(r_res) * J0(2 Omega t)``;
    1D: ``4 pi Omega^2 / Delta'(x_res) * J0(2 Omega t)``.
    """
    _check_dimension(dimension)
    if t < 0:
        raise DomainError("t must be >= 0")
    r_res, slope = resonance_radius(trap, phys)
    omega = trap.rabi
    if dimension == "3d":
        prefactor = 8.0 * math.pi**2 * r_res**2 * omega**2 / slope
    else:
        prefactor = 4.0 * math.pi * omega**2 / slope
    return prefactor * bessel_j0(2.0 * omega * t)


def gamma_perturbative(trap: TrapCoupling, phys: PhysicalParams, dimension="3d", detuning=None):
    """Constant weak-coupling rate. Units m^3/s (3D) or m/s (1D)."""
    _check_dimension(dimension)
    d = _detuning(trap, detuning)
    hbar = phys.hbar
    k = trap.spring_constant(phys)
    omega = trap.rabi
    if dimension == "3d":
        return 8.0 * math.pi**2 * hbar * omega**2 * math.sqrt(2.0 * hbar * d) / k**1.5
    return 4.0 * math.pi * hbar * omega**2 / math.sqrt(2.0 * hbar * d * k)


def decay_coefficient(trap: TrapCoupling, phys: PhysicalParams, dimension="3d", detuning=None):
    """``alpha`` of the chemical-potential ODE, J^(p+1)/s with p = 3/2 or 1/2."""
    gamma = gamma_perturbative(trap, phys, dimension, detuning)
    k = trap.spring_constant(phys)
    if dimension == "3d":
        return 3.0 * gamma * k**1.5 * 2.0**-3.5 / math.pi
    return gamma * math.sqrt(k) / (2.0 * math.sqrt(2.0))


def density_at_resonance(mu, trap: TrapCoupling, phys: PhysicalParams, dimension="3d", detuning=None):
    """Condensate density on the resonance shell, clamped at zero."""
    if mu < 0:
        raise DomainError("mu must be >= 0")
    d = trap.detuning0 if detuning is None else detuning
    return max(mu - phys.hbar * d, 0.0) / _interaction(phys, dimension)


def steady_state(trap: TrapCoupling, phys: PhysicalParams, mu0, dimension="3d"):
    """Final ``(mu, N)``: the resonance sits on the condensate surface."""
    mu_inf = min(phys.hbar * trap.detuning0, mu0)
    return mu_inf, n_from_mu(mu_inf, phys, trap, dimension)


def energy_width(trap: TrapCoupling, phys: PhysicalParams, mu0, dimension="3d"):
    """Initial population decay rate and natural energy width ``(gamma_pop, delta_E)``.

    In 3D this is ``delta_E = (15/2) pi hbar^(5/2) Omega^2 sqrt(Delta0) / mu0^(3/2)``,
    which equals ``hbar * Gamma * n(0) / N0`` with ``n(0)`` the central
    density. The 1D value is taken from the same ratio.
    """
    _check_dimension(dimension)
    if not mu0 > 0:
        raise DomainError("mu0 must be positive")
    d = _detuning(trap, None)
    hbar = phys.hbar
    if dimension == "3d":
        delta_e = 7.5 * math.pi * hbar**2.5 * trap.rabi**2 * math.sqrt(d) / mu0**1.5
        return delta_e / hbar, delta_e
    u = _interaction(phys, dimension)
    gamma_pop = gamma_perturbative(trap, phys, dimension) * (mu0 / u) / n_from_mu(mu0, phys, trap, dimension)
    return gamma_pop, hbar * gamma_pop


def rate_set(trap: TrapCoupling, phys: PhysicalParams, mu0, dimension="3d") -> RateSet:
    gamma_pop, delta_e = energy_width(trap, phys, mu0, dimension)
    return RateSet(
        gamma=gamma_perturbative(trap, phys, dimension),
        alpha=decay_coefficient(trap, phys, dimension),
        gamma_pop=gamma_pop,
        delta_E=delta_e,
        r_res=resonance_radius(trap, phys)[0],
    )


def output_velocity(mu, trap: TrapCoupling, phys: PhysicalParams, detuning=None):
    """Speed of released atoms, ``M v^2 / 2 = mu - hbar*Delta0``."""
    d = trap.detuning0 if detuning is None else detuning
    return np.sqrt(2.0 * np.maximum(np.asarray(mu) - phys.hbar * np.asarray(d), 0.0) / phys.mass)


def velocity_width(traj: DecayTrajectory, rates: RateSet, phys: PhysicalParams):
    """Mean output velocity and relative velocity width ``delta_v / <v>``."""
    if len(traj) == 0:
        raise DomainError("empty trajectory")
    v = float(traj.velocity[0])
    if v <= 0:
        raise DegenerateOutputError("output velocity is zero; no atoms leave the condensate")
    dv = rates.delta_E / (phys.mass * v)
    return v, dv / v


# ---------------------------------------------------------------------------
# Time evolution


def implicit_integral(mu, hbar_delta, dimension="3d"):
    """Antiderivative ``F`` with ``F(mu0) - F(mu(t)) = alpha t``.

    3D: ``2 D mu^(1/2) + (2/3) mu^(3/2) - 2 D^(3/2) artanh(sqrt(mu/D))``
    1D: ``2 mu^(1/2) - 2 D^(1/2) artanh(sqrt(mu/D))``
    with ``D = hbar*Delta0`` and the real branch of artanh for ``mu > D``.
    """
    root = math.sqrt(mu)
    at = artanh_branch(math.sqrt(mu / hbar_delta))
    if dimension == "3d":
        return 2.0 * hbar_delta * root + (2.0 / 3.0) * mu * root - 2.0 * hbar_delta**1.5 * at
    return 2.0 * root - 2.0 * math.sqrt(hbar_delta) * at


def settling_time_estimate(trap, phys, mu0, dimension="3d", residual=1e-3):
    """Time until ``mu - hbar*Delta0`` falls to ``residual`` of its start value."""
    d = phys.hbar * trap.detuning0
    alpha = decay_coefficient(trap, phys, dimension)
    if mu0 <= d or alpha == 0:
        return math.inf
    mu_end = d + residual * (mu0 - d)
    return (implicit_integral(mu0, d, dimension) - implicit_integral(mu_end, d, dimension)) / alpha


def default_time_grid(trap: TrapCoupling, phys: PhysicalParams, mu0, dimension="3d", max_points=200_001):
    """Uniform grid resolving both the early decay and the final approach.

    ``dt = min(0.01/rate, 10 ms)`` where ``rate`` is the larger of the
    initial population rate and the linearised rate near the steady state;
    the horizon is 1.5x the time to reach 0.1% of the initial flux.
    """
    d = phys.hbar * trap.detuning0
    gamma_pop, _ = energy_width(trap, phys, mu0, dimension)
    alpha = decay_coefficient(trap, phys, dimension)
    late_rate = alpha / d ** _mu_exponent(dimension)
    rate = max(gamma_pop, late_rate)
    dt = 0.01 if rate == 0 else min(0.01 / rate, 0.01)
    horizon = 1.5 * settling_time_estimate(trap, phys, mu0, dimension)
    if not math.isfinite(horizon):
        horizon = 1.0
    n = min(int(math.ceil(horizon / dt)) + 1, max_points)
    return np.linspace(0.0, horizon, n)


def _check_grid(t_grid, t0):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("t_grid must be a non-empty 1-D array")
    if np.any(np.diff(t) <= 0):
        raise DomainError("t_grid must be strictly increasing")
    if t[0] < t0:
        raise DomainError(f"t_grid starts at {t[0]!r}, before the initial state at {t0!r}")
    return t


def _assemble(t, mu, detuning, trap, phys, dimension, method, flag=None):
    u = _interaction(phys, dimension)
    meta = parameter_record(phys, trap.with_changes(chirp=None), n_atoms=n_from_mu(float(mu[0]), phys, trap, dimension))
    n_atoms = np.array([n_from_mu(m, phys, trap, dimension) for m in mu])
    excess = np.maximum(mu - phys.hbar * detuning, 0.0)
    if trap.rabi == 0:
        gamma = np.zeros_like(t)
    else:
        gamma = np.array([gamma_perturbative(trap, phys, dimension, d) for d in detuning])
    return DecayTrajectory(
        t=t,
        mu=mu,
        n_atoms=n_atoms,
        flux=gamma * excess / u,
        velocity=np.sqrt(2.0 * excess / phys.mass),
        detuning=detuning,
        dimension=dimension,
        method=method,
        flag=flag,
        meta=meta,
    )


def evolve_decay(
    initial: AnalyticState,
    t_grid: Sequence[float],
    trap: TrapCoupling,
    phys: PhysicalParams,
    method: str = "implicit",
    dimension: str = "3d",
) -> DecayTrajectory:
    """Integrate the chemical-potential decay on ``t_grid``.

    ``method="ode-rk4"`` integrates the ODE directly; ``"implicit"``
    inverts the closed-form integral at every grid time. A chirp schedule on
    ``trap`` is honoured by the ODE route only.
    """
    _check_dimension(dimension)
    if method not in METHODS:
        raise InvalidParameterError(f"method must be one of {METHODS}, got {method!r}")
    t = _check_grid(t_grid, initial.t)
    mu0 = float(initial.mu)
    if not mu0 > 0:
        raise DomainError("initial chemical potential must be positive")
    n_expected = n_from_mu(mu0, phys, trap, dimension)
    if not math.isclose(initial.n_atoms, n_expected, rel_tol=1e-10):
        raise InvalidParameterError(
            f"initial state inconsistent: N={initial.n_atoms!r} but N(mu)={n_expected!r}"
        )

    hbar = phys.hbar
    if trap.chirp is not None:
        detuning = np.array([trap.detuning_at(ti) for ti in t])
    else:
        detuning = np.full_like(t, trap.detuning0)
    if np.any(detuning <= 0):
        raise NoResonanceError("centre detuning must stay positive")

    if trap.chirp is None and mu0 <= hbar * trap.detuning0:
        return _assemble(
            t, np.full_like(t, mu0), detuning, trap, phys, dimension, method, "resonance-outside-condensate"
        )
    if trap.rabi == 0:
        return _assemble(t, np.full_like(t, mu0), detuning, trap, phys, dimension, method)

    p = _mu_exponent(dimension)
    if method == "ode-rk4":
        alpha0 = decay_coefficient(trap, phys, dimension)

        def rhs(ti, mu):
            if trap.chirp is None:
                d, alpha = trap.detuning0, alpha0
            else:
                d = trap.detuning_at(ti)
                alpha = decay_coefficient(trap, phys, dimension, d)
            return -alpha * max(mu - hbar * d, 0.0) / mu**p

        if t[0] > initial.t:
            mu = rk4_integrate(rhs, mu0, np.concatenate(([initial.t], t)))[1:]
        else:
            mu = rk4_integrate(rhs, mu0, t)
        return _assemble(t, mu, detuning, trap, phys, dimension, method)

    if trap.chirp is not None:
        raise InvalidParameterError("the implicit solution needs a constant detuning; use ode-rk4")
    d = hbar * trap.detuning0
    alpha = decay_coefficient(trap, phys, dimension)
    f0 = implicit_integral(mu0, d, dimension)
    lo = d * (1.0 + _BRACKET_EPS)
    t_lo = (f0 - implicit_integral(lo, d, dimension)) / alpha
    mu = np.empty_like(t)
    for i, ti in enumerate(t - initial.t):
        target = alpha * ti
        if target == 0:
            mu[i] = mu0
            continue
        g = lambda m: f0 - implicit_integral(m, d, dimension) - target  # noqa: E731
        if g(lo) < 0:
            # below the bracket floor the ODE is linear in mu - D
            mu[i] = d + (lo - d) * math.exp(-alpha * (ti - t_lo) / d**p)
            continue
        mu[i] = find_root(g, RootBracket(lo, mu0, tol_rel=1e-15))
    return _assemble(t, mu, detuning, trap, phys, dimension, method)


def fit_population_rate(traj: DecayTrajectory, n_final=None, window=0.1):
    """Exponential-decay rate of ``N(t) - N(inf)`` fitted over the early decay.

    Uses the points where ``N - N(inf)`` is still above ``1 - window`` of its
    initial value (least squares on the log).
    """
    if n_final is None:
        n_final = traj.n_atoms[-1]
    excess = traj.n_atoms - n_final
    if excess[0] <= 0:
        raise DomainError("no population decay to fit")
    keep = excess >= (1.0 - window) * excess[0]
    if keep.sum() < 3:
        raise DomainError("too few early points for an exponential fit")
    slope, _ = np.polyfit(traj.t[keep] - traj.t[0], np.log(excess[keep]), 1)
    return -slope


# ---------------------------------------------------------------------------
# rf chirp compensation
#
# Holding mu(t) - hbar*Delta0(t) = c fixed, with x = hbar*Delta0(t), the ODE
# becomes dx/dt = -alpha(x) c / (x + c)^p. Since alpha ~ sqrt(x) in 3D and
# ~ 1/sqrt(x) in 1D the elapsed time t(x) has a closed form in s = sqrt(x).


def _g3(s, c):
    # integral of (s^2 + c)^(3/2) ds
    r = math.sqrt(s * s + c)
    return s * (2.0 * s * s + 5.0 * c) * r / 8.0 + 3.0 * c * c / 8.0 * math.asinh(s / math.sqrt(c))


def _g1(s, c):
    # integral of s^2 (s^2 + c)^(1/2) ds
    r = math.sqrt(s * s + c)
    return s * (2.0 * s * s + c) * r / 8.0 - c * c / 8.0 * math.asinh(s / math.sqrt(c))


def _chirp_elapsed(x, x0, c, alpha0, dimension):
    if dimension == "3d":
        return 2.0 * math.sqrt(x0) / (alpha0 * c) * (_g3(math.sqrt(x0), c) - _g3(math.sqrt(x), c))
    return 2.0 / (alpha0 * math.sqrt(x0) * c) * (_g1(math.sqrt(x0), c) - _g1(math.sqrt(x), c))


def chirp_exhaustion_time(mu0, trap: TrapCoupling, phys: PhysicalParams, dimension="3d"):
    """Time at which the compensating chirp reaches zero centre detuning."""
    x0 = phys.hbar * trap.detuning0
    c = mu0 - x0
    if c <= 0:
        raise DomainError("mu0 must exceed hbar*Delta0")
    alpha0 = decay_coefficient(trap, phys, dimension)
    if alpha0 == 0:
        return math.inf
    return _chirp_elapsed(0.0, x0, c, alpha0, dimension)


def chirp_compensation(
    initial: AnalyticState,
    t_grid: Sequence[float],
    trap: TrapCoupling,
    phys: PhysicalParams,
    dimension: str = "3d",
) -> Tuple[DecayTrajectory, np.ndarray]:
    """Sweep the rf frequency so the output velocity stays constant.

    The centre detuning follows ``hbar*Delta0(t) = hbar*Delta0(0) + mu(t) - mu(0)``.
    Returns the trajectory and the detuning schedule (rad/s) on ``t_grid``.
    Raises :class:`ChirpExhaustedError` if the grid runs past the time at
    which the schedule would reach zero detuning.
    """
    _check_dimension(dimension)
    t = _check_grid(t_grid, initial.t)
    hbar = phys.hbar
    x0 = hbar * trap.detuning0
    mu0 = float(initial.mu)
    c = mu0 - x0
    if c <= 0:
        raise DomainError("chirp compensation needs mu0 > hbar*Delta0")
    base = trap.with_changes(chirp=None)
    alpha0 = decay_coefficient(base, phys, dimension)
    if alpha0 == 0:
        schedule = np.full_like(t, trap.detuning0)
        return _assemble(t, np.full_like(t, mu0), schedule, base, phys, dimension, "chirp"), schedule

    t_star = _chirp_elapsed(0.0, x0, c, alpha0, dimension)
    elapsed = t - initial.t
    if elapsed[-1] >= t_star:
        raise ChirpExhaustedError(
            f"chirp drives the detuning to zero at t={initial.t + t_star:.6g} s", time=initial.t + t_star
        )
    x = np.empty_like(t)
    for i, te in enumerate(elapsed):
        if te == 0:
            x[i] = x0
            continue
        g = lambda xx: _chirp_elapsed(xx, x0, c, alpha0, dimension) - te  # noqa: E731
        x[i] = find_root(g, RootBracket(0.0, x0, tol_rel=1e-15))
    schedule = x / hbar
    return _assemble(t, x + c, schedule, base, phys, dimension, "chirp"), schedule
