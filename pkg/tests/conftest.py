import math

import pytest

from atomlaser import analytic
from atomlaser.units import PhysicalParams, TrapCoupling

OMEGA_T = 2.0 * math.pi * 106.0
N0 = 5e6


@pytest.fixture
def phys():
    return PhysicalParams()


@pytest.fixture
def trap():
    """Reference coupling: Delta(0) = 3500 1/s, Omega = 20 1/s."""
    return TrapCoupling(omega_T=OMEGA_T, detuning0=3500.0, rabi=20.0)


@pytest.fixture
def phys1(phys, trap):
    """Sodium with the 1D coupling matched to the 3D chemical potential at N0."""
    return phys.with_changes(interaction_U1=analytic.matched_interaction_1d(N0, phys, trap))


ACCEPTANCE = []


def record_criterion(label, ok, detail):
    """Log one acceptance line; the lines are repeated at the end of the run."""
    ACCEPTANCE.append(f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE[-1])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
