import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fraclap.ground_state import ProblemParams, solve_ground_state
from fraclap.spectral import SectorIndex, make_grid

settings.register_profile("fraclap", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fraclap")


@pytest.fixture(scope="session")
def bo_grid():
    return make_grid(SectorIndex(1, 0), 200.0, 1024)


@pytest.fixture(scope="session")
def bo_state(bo_grid):
    """Benjamin-Ono ground state, exact profile 2/(1+r^2)."""
    return solve_ground_state(ProblemParams(1, 0.5, 1.0), bo_grid)


@pytest.fixture(scope="session")
def small_grid_3d():
    return make_grid(SectorIndex(3, 0), 20.0, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULT_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
