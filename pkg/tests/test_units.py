import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from atomlaser.errors import InvalidParameterError
from atomlaser.units import (
    BOHR_RADIUS,
    HBAR,
    SODIUM23_MASS,
    PhysicalParams,
    TrapCoupling,
    UnitSystem,
    derive_interaction,
    from_dimensionless,
    rabi_from_field,
    to_dimensionless,
)

from conftest import OMEGA_T

# 4 pi hbar^2 (53 a0) / M(23Na), evaluated with mpmath at 40 digits
U_SODIUM = 1.026728169377481354749512019467664644025e-50
# sqrt(hbar / (M omega_T)) for omega_T = 2 pi x 106 Hz
A_HO = 2.036588833681155362360104552049851901829e-06


def test_interaction_sodium(phys):
    assert phys.interaction_U == pytest.approx(U_SODIUM, rel=1e-12)
    assert phys.interaction_U == pytest.approx(1.02e-50, rel=0.01)


def test_interaction_zero_and_linear():
    assert derive_interaction(HBAR, SODIUM23_MASS, 0.0) == 0.0
    one = derive_interaction(HBAR, SODIUM23_MASS, 53 * BOHR_RADIUS)
    two = derive_interaction(HBAR, SODIUM23_MASS, 106 * BOHR_RADIUS)
    assert two == pytest.approx(2 * one, rel=1e-15)


@pytest.mark.parametrize("kwargs", [{"mass": -1.0}, {"hbar": 0.0}, {"scatter_len": -1e-9}, {"mass": math.nan}])
def test_invalid_physical_params(kwargs):
    with pytest.raises(InvalidParameterError):
        PhysicalParams(**kwargs)


def test_physical_params_immutable(phys):
    with pytest.raises(AttributeError):
        phys.mass = 1.0
    assert phys.with_changes(scatter_len=2 * phys.scatter_len).interaction_U == pytest.approx(2 * phys.interaction_U)


def test_interaction_1d_required(phys):
    with pytest.raises(InvalidParameterError):
        phys.interaction("1d")
    assert phys.with_changes(interaction_U1=1e-41).interaction("1d") == 1e-41


def test_detuning_consistency():
    v_off = 1e-30
    tc = TrapCoupling(omega_T=OMEGA_T, omega_rf=5000.0, V_off=v_off, rabi=20.0)
    assert HBAR * tc.detuning0 == pytest.approx(HBAR * tc.omega_rf - v_off, rel=1e-12)
    back = TrapCoupling(omega_T=OMEGA_T, detuning0=tc.detuning0, V_off=v_off, rabi=20.0)
    assert back.omega_rf == pytest.approx(5000.0, rel=1e-12)
    with pytest.raises(InvalidParameterError):
        TrapCoupling(omega_T=OMEGA_T, detuning0=3500.0, omega_rf=3600.0, rabi=20.0)


def test_rabi_from_field():
    b = 1e-9
    tc = TrapCoupling(omega_T=OMEGA_T, detuning0=3500.0, b_field_amp=b, g_factor=-0.5)
    mu_b = 9.2740100657e-24
    assert HBAR * tc.rabi == pytest.approx(0.5 * mu_b * b / math.sqrt(2), rel=1e-9)
    assert tc.rabi == pytest.approx(rabi_from_field(b, -0.5))
    with pytest.raises(InvalidParameterError):
        TrapCoupling(omega_T=OMEGA_T, detuning0=3500.0, b_field_amp=b, rabi=2 * tc.rabi)


@pytest.mark.parametrize("kwargs", [
    {"omega_T": -1.0, "detuning0": 1.0, "rabi": 1.0},
    {"omega_T": 1.0, "detuning0": 1.0, "rabi": -1.0},
    {"omega_T": 1.0, "detuning0": 1.0},
    {"omega_T": 1.0, "rabi": 1.0},
])
def test_invalid_trap(kwargs):
    with pytest.raises(InvalidParameterError):
        TrapCoupling(**kwargs)


def test_trap_units(phys, trap):
    u = UnitSystem.trap_units(phys, trap)
    assert u.length_scale == pytest.approx(A_HO, rel=1e-12)
    assert to_dimensionless(A_HO, "length", u) == pytest.approx(1.0, rel=1e-12)
    assert u.energy_scale == pytest.approx(HBAR * OMEGA_T)
    # velocity scale a_ho * omega_T
    assert u.scale("velocity") == pytest.approx(A_HO * OMEGA_T, rel=1e-12)


def test_oscillator_width_by_quadrature(phys, trap):
    import numpy as np
    from scipy.integrate import quad

    # ideal oscillator ground state |phi|^2 = exp(-x^2/a^2)/(sqrt(pi) a) has <x^2> = a^2/2;
    # obtain a from the Hamiltonian's energy minimum over Gaussian widths instead
    k = phys.mass * trap.omega_T**2

    def energy(a):
        kin, _ = quad(lambda x: phys.hbar**2 / (2 * phys.mass) * (x / a**2) ** 2 * np.exp(-(x**2) / a**2), -20 * a, 20 * a)
        pot, _ = quad(lambda x: 0.5 * k * x**2 * np.exp(-(x**2) / a**2), -20 * a, 20 * a)
        return (kin + pot) / (math.sqrt(math.pi) * a)

    from scipy.optimize import minimize_scalar

    best = minimize_scalar(lambda s: energy(s * 1e-6), bounds=(0.5, 5.0), method="bounded", options={"xatol": 1e-10})
    assert best.x * 1e-6 == pytest.approx(UnitSystem.trap_units(phys, trap).length_scale, rel=1e-5)


def test_unknown_dimension(phys, trap):
    u = UnitSystem.trap_units(phys, trap)
    with pytest.raises(InvalidParameterError):
        u.scale("furlongs")
    with pytest.raises(InvalidParameterError):
        u.scale((1, 2))


@given(
    value=st.floats(min_value=-1e30, max_value=1e30, allow_nan=False),
    dim=st.sampled_from(["length", "time", "energy", "velocity", "rate_3d", "interaction_1d", "mass"]),
)
def test_round_trip(value, dim):
    u = UnitSystem(2.04e-6, 1.5e-3, 7.0e-32)
    back = from_dimensionless(to_dimensionless(value, dim, u), dim, u)
    assert back == pytest.approx(value, rel=1e-12, abs=1e-300)
