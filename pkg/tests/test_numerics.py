import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atomlaser.errors import BracketError, ConvergenceError, DomainError, PropagationError
from atomlaser.numerics import RootBracket, artanh_branch, bessel_j0, find_root, rk4_integrate


def _j0_series(x, terms=40):
    # 40-term power series in mpmath, independent of the package implementation
    mpmath.mp.dps = 60
    x = mpmath.mpf(x)
    return float(mpmath.fsum((-(x**2) / 4) ** k / mpmath.factorial(k) ** 2 for k in range(terms)))


def test_j0_values():
    assert bessel_j0(0.0) == 1.0
    assert bessel_j0(1.0) == pytest.approx(0.7651976865579665514, abs=1e-12)
    # first zero, located by bisection on the power series
    assert abs(bessel_j0(2.404825557695772768621631879326413920144)) < 1e-9


@given(st.floats(min_value=-10, max_value=10))
def test_j0_matches_power_series(x):
    assert abs(bessel_j0(x) - _j0_series(x)) < 1e-10


@settings(max_examples=60)
@given(st.floats(min_value=-100, max_value=100))
def test_j0_accuracy_to_100(x):
    mpmath.mp.dps = 30
    assert abs(bessel_j0(x) - float(mpmath.besselj(0, x))) <= 1e-10


@pytest.mark.parametrize("x", [math.inf, -math.inf, math.nan])
def test_j0_non_finite(x):
    with pytest.raises(DomainError):
        bessel_j0(x)


def test_artanh_branch():
    assert artanh_branch(0.0) == 0.0
    assert artanh_branch(0.5) == pytest.approx(0.5 * math.log(3.0), rel=1e-15)
    assert artanh_branch(2.0) == pytest.approx(0.5 * math.log(3.0), rel=1e-15)
    with pytest.raises(DomainError):
        artanh_branch(1.0)
    with pytest.raises(DomainError):
        artanh_branch(-0.1)


@given(st.floats(min_value=1.0 + 1e-9, max_value=1e8))
def test_artanh_branch_is_real_part(x):
    assert artanh_branch(x) == pytest.approx(float(mpmath.re(mpmath.atanh(x))), rel=1e-9)


def test_find_root_simple():
    assert find_root(lambda x: x - 1.0, RootBracket(0.0, 2.0)) == pytest.approx(1.0, abs=1e-14)
    assert find_root(lambda x: x * x - 2.0, RootBracket(1.0, 2.0)) == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_find_root_errors():
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1.0, RootBracket(-1.0, 1.0))
    with pytest.raises(ConvergenceError):
        find_root(lambda x: math.tan(x), RootBracket(1.0, 2.0, tol_rel=1e-300, max_iter=5))
    with pytest.raises(ValueError):
        RootBracket(2.0, 1.0)


def test_find_root_deterministic():
    f = lambda x: math.exp(x) - 3.0 * x  # noqa: E731
    roots = {find_root(f, RootBracket(0.0, 1.0)) for _ in range(5)}
    assert len(roots) == 1


def test_rk4_trivial():
    t = np.linspace(0, 1, 11)
    np.testing.assert_array_equal(rk4_integrate(lambda t, y: 0.0, 2.5, t), np.full(11, 2.5))
    t = np.linspace(0, 1, 1001)
    assert rk4_integrate(lambda t, y: -y, 1.0, t)[-1] == pytest.approx(math.exp(-1.0), abs=1e-8)


def _rk4_error(n):
    t = np.linspace(0.0, 1.0, n + 1)
    return abs(rk4_integrate(lambda t, y: -y, 1.0, t)[-1] - math.exp(-1.0))


def test_rk4_order():
    e1, e2 = _rk4_error(20), _rk4_error(40)
    order = math.log2(e1 / e2)
    assert e1 / e2 >= 12
    assert 3.7 <= order <= 4.3


def test_rk4_vector_and_errors():
    t = np.linspace(0, math.pi, 2001)
    y = rk4_integrate(lambda t, y: np.array([y[1], -y[0]]), [0.0, 1.0], t)
    assert y[-1, 0] == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(PropagationError) as info:
        rk4_integrate(lambda t, y: math.nan if t > 0.5 else 0.0, 0.0, np.linspace(0, 1, 11))
    assert info.value.time is not None
    with pytest.raises(DomainError):
        rk4_integrate(lambda t, y: 0.0, 0.0, [0.0, 1.0, 1.0])
