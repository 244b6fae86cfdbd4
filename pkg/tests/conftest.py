import numpy as np
import pytest
from hypothesis import settings

from cattaneo_sphere import PhysParams, RadialGrid, affine

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def params():
    return PhysParams()


@pytest.fixture
def grid64():
    return RadialGrid(1.0, 2.0, 64)


@pytest.fixture
def variable_params():
    """All four coefficient functions depend on temperature."""
    return PhysParams(tau=0.1, mu=0.1, lam=0.05, g=affine(0.3), h=affine(-0.2), l=affine(0.4), kappa=affine(0.5))


def observed_orders(errors, ns):
    return [np.log(errors[i] / errors[i + 1]) / np.log(ns[i + 1] / ns[i]) for i in range(len(errors) - 1)]


ACCEPTANCE_LINES = []


def record_criterion(name, ok, detail):
    """Store one pass/fail line for the terminal summary and return ``ok``."""
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
