"""Physical constants, experiment parameters and trap units.

Everything is stored in SI internally. :class:`UnitSystem` converts to and
from harmonic-oscillator units for I/O and for building numerical grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from scipy import constants

from .errors import InvalidParameterError

HBAR = constants.hbar
BOHR_RADIUS = constants.physical_constants["Bohr radius"][0]
BOHR_MAGNETON = constants.physical_constants["Bohr magneton"][0]
ATOMIC_MASS = constants.atomic_mass

#: 23Na isotope mass in kg
SODIUM23_MASS = 22.9897692820 * ATOMIC_MASS
#: Mean F=1 sodium scattering length
SODIUM23_SCATTER_LEN = 53.0 * BOHR_RADIUS
#: Lande g factor of the sodium F=1 ground state
SODIUM23_G_FACTOR = -0.5

_REL_TOL = 1e-12


def _check_positive(**values):
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise InvalidParameterError(f"{name} must be positive and finite, got {value!r}")


def derive_interaction(hbar: float, mass: float, scatter_len: float) -> float:
    """Contact interaction constant ``U = 4 pi hbar^2 a / M`` in J m^3."""
    _check_positive(hbar=hbar, mass=mass)
    if not (math.isfinite(scatter_len) and scatter_len >= 0):
        raise InvalidParameterError(f"scatter_len must be >= 0, got {scatter_len!r}")
    return 4.0 * math.pi * hbar**2 * scatter_len / mass


@dataclass(frozen=True)
class PhysicalParams:
    """Atomic species and fundamental constants.

    ``interaction_U`` is derived from the other fields. ``interaction_U1`` is
    the coupling constant (J m) used by one-dimensional models; it has no
    unique 3D counterpart and is set explicitly, see
    :func:`atomlaser.analytic.matched_interaction_1d`.
    """

    hbar: float = HBAR
    mass: float = SODIUM23_MASS
    scatter_len: float = SODIUM23_SCATTER_LEN
    bohr_radius: float = BOHR_RADIUS
    interaction_U1: Optional[float] = None
    interaction_U: float = field(init=False)

    def __post_init__(self):
        _check_positive(hbar=self.hbar, mass=self.mass, bohr_radius=self.bohr_radius)
        object.__setattr__(
            self, "interaction_U", derive_interaction(self.hbar, self.mass, self.scatter_len)
        )
        if self.interaction_U1 is not None and not (
            math.isfinite(self.interaction_U1) and self.interaction_U1 >= 0
        ):
            raise InvalidParameterError(f"interaction_U1 must be >= 0, got {self.interaction_U1!r}")

    @property
    def scatter_len_bohr(self) -> float:
        return self.scatter_len / self.bohr_radius

    def with_changes(self, **changes) -> "PhysicalParams":
        values = {
            "hbar": self.hbar,
            "mass": self.mass,
            "scatter_len": self.scatter_len,
            "bohr_radius": self.bohr_radius,
            "interaction_U1": self.interaction_U1,
        }
        values.update(changes)
        return PhysicalParams(**values)

    def interaction(self, dimension: str = "3d") -> float:
        """Interaction constant for ``dimension`` ("1d" or "3d")."""
        if dimension == "3d":
            return self.interaction_U
        if dimension == "1d":
            if self.interaction_U1 is None:
                raise InvalidParameterError("interaction_U1 is not set; 1D models need it")
            return self.interaction_U1
        raise InvalidParameterError(f"unknown dimension {dimension!r}")


def rabi_from_field(b_field_amp: float, g_factor: float = SODIUM23_G_FACTOR, hbar: float = HBAR) -> float:
    """Rabi frequency (rad/s) from ``hbar Omega = |g| mu_B |B| / sqrt(2)``."""
    return abs(g_factor) * BOHR_MAGNETON * abs(b_field_amp) / (math.sqrt(2.0) * hbar)


# A chirp schedule maps time (s) to the centre detuning (rad/s).
ChirpSchedule = Callable[[float], float]


@dataclass(frozen=True)
class TrapCoupling:
    """Isotropic harmonic trap plus the rf output coupler.

    ``detuning0`` is the centre detuning with ``hbar*detuning0 = hbar*omega_rf
    - V_off``; pass either of ``omega_rf``/``detuning0`` and the other is
    filled in. If ``b_field_amp`` is given, ``rabi`` may be omitted and is
    derived from the field amplitude.
    """

    omega_T: float
    detuning0: Optional[float] = None
    rabi: Optional[float] = None
    V_off: float = 0.0
    omega_rf: Optional[float] = None
    b_field_amp: Optional[float] = None
    g_factor: Optional[float] = None
    chirp: Optional[ChirpSchedule] = None

    def __post_init__(self):
        _check_positive(omega_T=self.omega_T)
        if not math.isfinite(self.V_off):
            raise InvalidParameterError("V_off must be finite")

        if self.detuning0 is None and self.omega_rf is None:
            raise InvalidParameterError("either detuning0 or omega_rf is required")
        if self.omega_rf is None:
            object.__setattr__(self, "omega_rf", self.detuning0 + self.V_off / HBAR)
        elif self.detuning0 is None:
            object.__setattr__(self, "detuning0", self.omega_rf - self.V_off / HBAR)
        else:
            expected = HBAR * self.omega_rf - self.V_off
            if not math.isclose(HBAR * self.detuning0, expected, rel_tol=_REL_TOL, abs_tol=1e-300):
                raise InvalidParameterError(
                    "detuning0, omega_rf and V_off are inconsistent: "
                    f"hbar*detuning0={HBAR * self.detuning0!r}, hbar*omega_rf-V_off={expected!r}"
                )
        if not math.isfinite(self.detuning0):
            raise InvalidParameterError("detuning0 must be finite")

        if self.b_field_amp is not None:
            g = SODIUM23_G_FACTOR if self.g_factor is None else self.g_factor
            from_field = rabi_from_field(self.b_field_amp, g)
            if self.rabi is None:
                object.__setattr__(self, "rabi", from_field)
            elif not math.isclose(self.rabi, from_field, rel_tol=_REL_TOL):
                raise InvalidParameterError(
                    f"rabi={self.rabi!r} inconsistent with b_field_amp (expected {from_field!r})"
                )
        if self.rabi is None:
            raise InvalidParameterError("rabi (or b_field_amp) is required")
        if not (math.isfinite(self.rabi) and self.rabi >= 0):
            raise InvalidParameterError(f"rabi must be >= 0, got {self.rabi!r}")

    def with_changes(self, **changes) -> "TrapCoupling":
        values = {
            "omega_T": self.omega_T,
            "detuning0": self.detuning0,
            "rabi": self.rabi,
            "V_off": self.V_off,
            "chirp": self.chirp,
        }
        if "omega_rf" in changes and "detuning0" not in changes:
            values.pop("detuning0")
        values.update(changes)
        return TrapCoupling(**values)

    def detuning_at(self, t: float) -> float:
        """Centre detuning at time ``t``, following the chirp when one is set."""
        if self.chirp is None:
            return self.detuning0
        return float(self.chirp(t))

    def spring_constant(self, phys: PhysicalParams) -> float:
        """``M omega_T^2`` in J/m^2."""
        return phys.mass * self.omega_T**2


# dimension name -> exponents of (length, time, energy)
DIMENSIONS = {
    "dimensionless": (0, 0, 0),
    "length": (1, 0, 0),
    "time": (0, 1, 0),
    "energy": (0, 0, 1),
    "frequency": (0, -1, 0),
    "velocity": (1, -1, 0),
    "mass": (-2, 2, 1),
    "action": (0, 1, 1),
    "density_1d": (-1, 0, 0),
    "density_3d": (-3, 0, 0),
    "interaction_1d": (1, 0, 1),
    "interaction_3d": (3, 0, 1),
    "rate_1d": (1, -1, 0),
    "rate_3d": (3, -1, 0),
    "flux": (0, -1, 0),
}

Dimension = Union[str, tuple]


@dataclass(frozen=True)
class UnitSystem:
    """Length, time and energy scales of a dimensionless unit system."""

    length_scale: float
    time_scale: float
    energy_scale: float

    def __post_init__(self):
        _check_positive(
            length_scale=self.length_scale, time_scale=self.time_scale, energy_scale=self.energy_scale
        )

    @classmethod
    def trap_units(cls, phys: PhysicalParams, trap: TrapCoupling) -> "UnitSystem":
        """Oscillator length, inverse trap frequency and trap quantum."""
        return cls(
            length_scale=math.sqrt(phys.hbar / (phys.mass * trap.omega_T)),
            time_scale=1.0 / trap.omega_T,
            energy_scale=phys.hbar * trap.omega_T,
        )

    def scale(self, dimension: Dimension) -> float:
        if isinstance(dimension, str):
            try:
                exps = DIMENSIONS[dimension]
            except KeyError:
                raise InvalidParameterError(f"unknown dimension {dimension!r}") from None
        else:
            exps = tuple(dimension)
            if len(exps) != 3:
                raise InvalidParameterError("dimension exponents must be (length, time, energy)")
        lx, tx, ex = exps
        return self.length_scale**lx * self.time_scale**tx * self.energy_scale**ex


def to_dimensionless(value, dimension: Dimension, units: UnitSystem):
    return value / units.scale(dimension)


def from_dimensionless(value, dimension: Dimension, units: UnitSystem):
    return value * units.scale(dimension)


def parameter_record(phys: PhysicalParams, trap: TrapCoupling, **extra) -> dict:
    """Flat dict of the physical inputs, used to check that two runs match."""
    record = {
        "hbar": phys.hbar,
        "mass": phys.mass,
        "scatter_len": phys.scatter_len,
        "interaction_U1": phys.interaction_U1,
        "omega_T": trap.omega_T,
        "detuning0": trap.detuning0,
        "rabi": trap.rabi,
        "V_off": trap.V_off,
    }
    record.update(extra)
    return record
