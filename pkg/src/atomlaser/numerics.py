"""Special functions and small integrators used by the analytic model.

These are deliberately self-contained (no scipy.special / scipy.integrate)
so that their behaviour is fixed by this file alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BracketError, ConvergenceError, DomainError, PropagationError

# Below this |x| the power series is used, above it the Hankel expansion.
# Both branches are accurate to ~1e-12 absolute here; at x=8 the asymptotic
# branch is only good to ~6e-10.
_J0_SERIES_LIMIT = 12.0


def _j0_series(x: float) -> float:
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if k > 4 and abs(term) < 1e-17 * max(1.0, abs(total)):
            return total


def _j0_asymptotic(x: float) -> float:
    # Hankel expansion; terms are summed until they start to grow.
    z8 = 8.0 * x
    p = 1.0
    q = 0.0
    term = 1.0
    prev = 1.0
    for k in range(1, 60):
        term *= -((2 * k - 1) ** 2) / (k * z8)
        if abs(term) > prev:
            break
        prev = abs(term)
        if k % 2 == 0:
            p += term if (k // 2) % 2 == 0 else -term
        else:
            q += term if ((k - 1) // 2) % 2 == 0 else -term
    chi = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j0(x: float) -> float:
    """Bessel function of the first kind of order zero.

    Accurate to about 1e-12 absolute for |x| <= 100.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"bessel_j0 needs a finite argument, got {x!r}")
    x = abs(x)
    if x <= _J0_SERIES_LIMIT:
        return _j0_series(x)
    return _j0_asymptotic(x)


def artanh_branch(x: float) -> float:
    """Real-valued inverse hyperbolic tangent continued past the pole.

    For ``0 <= x < 1`` this is ``artanh(x)``. For ``x > 1`` it returns the
    real part ``0.5*log((x+1)/(x-1))``, i.e. ``arcoth(x)``; the discarded
    imaginary part is a constant that drops out of definite integrals.
    """
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"artanh_branch is defined for finite x >= 0, got {x!r}")
    if x == 1.0:
        raise DomainError("artanh_branch has a pole at x = 1")
    if x < 1.0:
        return math.atanh(x)
    return 0.5 * math.log1p(2.0 / (x - 1.0))


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    tol_rel: float = 1e-14
    max_iter: int = 400

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BracketError(f"bracket needs lo < hi, got [{self.lo!r}, {self.hi!r}]")
        if not self.tol_rel > 0:
            raise BracketError("tol_rel must be positive")


def find_root(f: Callable[[float], float], bracket: RootBracket) -> float:
    """Find a sign change of ``f`` inside ``bracket``.

    Secant (regula falsi, Illinois variant) steps are tried first and fall
    back to bisection whenever they would not shrink the bracket enough.
    Deterministic: the same inputs always give the same float.
    """
    a, b = float(bracket.lo), float(bracket.hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.isnan(fa) or math.isnan(fb) or fa * fb > 0:
        raise BracketError(f"no sign change on [{a!r}, {b!r}]: f(lo)={fa!r}, f(hi)={fb!r}")

    side = 0
    for _ in range(bracket.max_iter):
        width = b - a
        if width <= bracket.tol_rel * max(abs(a), abs(b)) or width <= 5e-324:
            return 0.5 * (a + b)
        c = (a * fb - b * fa) / (fb - fa) if fb != fa else 0.5 * (a + b)
        # keep the secant step from hugging one end of the bracket
        if not (a + 0.01 * width < c < b - 0.01 * width) or not math.isfinite(c):
            c = 0.5 * (a + b)
        fc = f(c)
        if math.isnan(fc):
            raise ConvergenceError(f"f returned NaN at x={c!r}")
        if fc == 0.0:
            return c
        if fa * fc < 0:
            b, fb = c, fc
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            a, fa = c, fc
            if side == 1:
                fb *= 0.5
            side = 1
    raise ConvergenceError(f"find_root did not converge in {bracket.max_iter} iterations")


def rk4_integrate(
    rhs: Callable[[float, float], float], y0, t_grid: Sequence[float]
) -> np.ndarray:
    """Classical fixed-step RK4 on the supplied time grid.

    ``y0`` may be a scalar or a 1-D array; the result has one row per grid
    point. Raises :class:`PropagationError` at the first non-finite value.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("t_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(t) <= 0):
        raise DomainError("t_grid must be strictly increasing")

    y = np.asarray(y0, dtype=float)
    out = np.empty((t.size,) + y.shape)
    out[0] = y
    for i in range(t.size - 1):
        ti = t[i]
        h = t[i + 1] - ti
        k1 = np.asarray(rhs(ti, y), dtype=float)
        k2 = np.asarray(rhs(ti + 0.5 * h, y + 0.5 * h * k1), dtype=float)
        k3 = np.asarray(rhs(ti + 0.5 * h, y + 0.5 * h * k2), dtype=float)
        k4 = np.asarray(rhs(ti + h, y + h * k3), dtype=float)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise PropagationError(f"non-finite state at t={t[i + 1]!r}", time=float(t[i + 1]), step=i + 1)
        out[i + 1] = y
    return out
