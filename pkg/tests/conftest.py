import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gramcone import StateSpace

settings.register_profile(
    "default", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def uncontrollable():
    # A=0.5, B=0, C=1, D=1: energy passes only through D
    return StateSpace.scalar(0.5, 0.0, 1.0, 1.0)


@pytest.fixture
def delay():
    return StateSpace.scalar(0.0, 1.0, 1.0, 0.0)


@pytest.fixture
def gain_two():
    # G(z) = 1 / (z - 0.5) peaks at 2 for z = 1
    return StateSpace.scalar(0.5, 1.0, 1.0, 0.0)


@pytest.fixture
def gain_small():
    # peak 0.4 / 0.5 = 0.8
    return StateSpace.scalar(0.5, 1.0, 0.4, 0.0)


def example_gramian():
    v = np.array([2.0, 1.0])
    return np.outer(v, v)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
