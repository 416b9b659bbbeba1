import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fraclap.ground_state import (
    ProblemParams,
    alpha_star,
    initial_profile,
    pohozaev_check,
    residual,
    solve_ground_state,
    tail_fit,
    weinstein_J,
)
from fraclap.spectral import SectorIndex, make_grid


def bo_exact(r):
    return 2.0 / (1.0 + r**2)


def sech_soliton(alpha, r):
    # s = 1, N = 1: Q = ((alpha+2)/2 sech^2(alpha r/2))^(1/alpha)
    return ((alpha + 2) / 2 / np.cosh(alpha * r / 2) ** 2) ** (1 / alpha)


def test_benjamin_ono_profile(bo_state):
    assert bo_state.converged
    err = np.abs(bo_state.Q.values - bo_exact(bo_state.grid.nodes)).max() / 2.0
    assert err < 1e-3


def test_benjamin_ono_tail_constant(bo_state):
    C, var = tail_fit(bo_state)
    assert C == pytest.approx(2.0, rel=0.02)
    assert var < 0.01


@pytest.mark.parametrize("alpha", [1.0, 2.0, 3.0])
def test_local_soliton(alpha):
    grid = make_grid(SectorIndex(1, 0), 40.0, 512)
    gs = solve_ground_state(ProblemParams(1, 1.0, alpha), grid)
    assert np.allclose(gs.Q.values, sech_soliton(alpha, grid.nodes), atol=1e-9)


@pytest.mark.parametrize("N, s, alpha, R, M", [(1, 0.7, 2.0, 400.0, 2048), (2, 0.9, 1.0, 200.0, 1024), (3, 0.9, 1.0, 100.0, 1024)])
def test_pohozaev_identities(N, s, alpha, R, M):
    gs = solve_ground_state(ProblemParams(N, s, alpha), make_grid(SectorIndex(N, 0), R, M))
    p1, p2 = pohozaev_check(gs)
    assert p1 < 1e-6 and p2 < 1e-6
    assert residual(gs.Q, gs.params) < 1e-9


def test_profile_is_positive_and_decreasing(bo_state):
    q = bo_state.Q.values
    assert np.all(q > 0)
    assert np.all(np.diff(q) < 0)


@given(eps=st.floats(-0.3, 0.3), k=st.integers(1, 6))
def test_ground_state_minimizes_weinstein(eps, k, bo_state):
    Q = bo_state.Q
    g = Q.grid
    bump = np.cos(k * g.nodes / 4.0) * np.exp(-((g.nodes / 8.0) ** 2))
    u = g.field(Q.values * (1.0 + eps * bump))
    assert weinstein_J(u, bo_state.params) >= bo_state.weinstein_J * (1 - 1e-10)


@pytest.mark.parametrize("kind", ["gaussian", "lorentzian", "sech"])
def test_starts_converge_to_same_profile(kind, bo_state):
    g = bo_state.grid
    gs = solve_ground_state(bo_state.params, g, init=initial_profile(g, kind, width=3.0, height=0.5))
    assert np.abs(gs.Q.values - bo_state.Q.values).max() < 1e-8


@pytest.mark.parametrize("N, s, expected", [(1, 0.5, math.inf), (3, 0.5, 1.0), (3, 0.75, 2.0), (2, 0.5, 2.0)])
def test_alpha_star(N, s, expected):
    assert alpha_star(s, N) == expected


@pytest.mark.parametrize("N, s, alpha", [(3, 0.5, 1.0), (3, 0.5, 2.0), (2, 0.5, 0.0), (1, 0.5, -1.0)])
def test_inadmissible_power_rejected(N, s, alpha):
    with pytest.raises(ValueError, match="alpha_"):
        ProblemParams(N, s, alpha)


def test_ground_state_requires_radial_sector():
    with pytest.raises(ValueError):
        solve_ground_state(ProblemParams(3, 0.9, 1.0), make_grid(SectorIndex(3, 1), 20.0, 64))


def test_unknown_initial_profile(small_grid_3d):
    with pytest.raises(ValueError):
        initial_profile(small_grid_3d, "triangle")
