import numpy as np
import pytest

from fraclap.continuation import (
    continue_branch,
    mass_derivative_check,
    scaling_generator_residual,
    tangent,
    tangent_residual,
    uniqueness_probe,
)
from fraclap.ground_state import ProblemParams, solve_ground_state
from fraclap.spectral import SectorIndex, make_grid


@pytest.fixture(scope="module")
def grid():
    return make_grid(SectorIndex(1, 0), 200.0, 1024)


@pytest.fixture(scope="module")
def short_branch(grid):
    return continue_branch(ProblemParams(1, 1.0, 1.0), grid, 1.0, 0.9, 0.01)


def test_branch_reaches_end(short_branch):
    s = [p.s for p in short_branch.points]
    assert s[0] == 1.0 and s[-1] == pytest.approx(0.9, abs=1e-12)
    assert np.allclose(np.diff(s), -0.01)
    assert {p.morse_index for p in short_branch.points} == {1}


def test_tangent_solves_linear_system(short_branch):
    assert max(p.tangent_residual for p in short_branch.points) < 1e-10


def test_mass_identity_along_branch(short_branch):
    assert max(mass_derivative_check(short_branch)) < 1e-3


def test_tangent_matches_finite_difference(short_branch):
    pts = short_branch.points
    for i in range(1, len(pts) - 1):
        fd = (pts[i + 1].Q.Q.coeffs - pts[i - 1].Q.Q.coeffs) / (pts[i + 1].s - pts[i - 1].s)
        dq = pts[i].dQds.coeffs
        assert np.linalg.norm(dq - fd) / np.linalg.norm(dq) < 1e-2


def test_band_ratios_stay_bounded(short_branch):
    assert all(v < 10 for v in short_branch.band_ratios().values())


def test_scaling_generator(short_branch):
    # L_+ ((2s/alpha) Q + r Q') = -2s Q, up to ball truncation
    assert scaling_generator_residual(short_branch.points[-1].Q) < 1e-4


def test_tangent_at_local_soliton(grid):
    gs = solve_ground_state(ProblemParams(1, 1.0, 2.0), grid)
    assert tangent_residual(gs, tangent(gs)) < 1e-10


def test_uniqueness_of_benjamin_ono(bo_state):
    rep = uniqueness_probe(bo_state.params, bo_state.grid, n_starts=3, endpoint=bo_state)
    assert len(rep.labels) == 4 and not rep.rejected
    assert rep.max_distance < 1e-6


def test_flipped_start_is_rejected(bo_state):
    rep = uniqueness_probe(bo_state.params, bo_state.grid, n_starts=2, include_flipped=True)
    assert "flipped-gaussian" in rep.rejected


@pytest.mark.parametrize("step", [1e-4, 0.1])
def test_step_bounds(grid, step):
    with pytest.raises(ValueError):
        continue_branch(ProblemParams(1, 1.0, 1.0), grid, 1.0, 0.9, step)


def test_mass_check_needs_three_points(short_branch):
    short = type(short_branch)(1, 1.0, 1.0, 0.99, short_branch.points[:2])
    with pytest.raises(ValueError):
        mass_derivative_check(short)
