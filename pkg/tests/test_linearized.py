import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fraclap.linearized import (
    assemble_lplus,
    cosine_similarity,
    free_gap,
    lplus_apply,
    lplus_solve,
    nondegeneracy_report,
    schrodinger_matrix,
    sector_spectrum,
    sign_changes,
)
from fraclap.spectral import SectorIndex, make_grid

GOLDEN = (1 + math.sqrt(5)) / 2


@pytest.fixture(scope="module")
def bo_radial(bo_state):
    A, grid = assemble_lplus(bo_state, 0)
    return sector_spectrum(A, grid, k=4)


def test_benjamin_ono_radial_eigenvalues(bo_radial):
    # the even L_+ of Benjamin-Ono has bound states -phi and 1/phi
    assert bo_radial.eigenvalues[0] == pytest.approx(-GOLDEN, abs=1e-4)
    assert bo_radial.eigenvalues[1] == pytest.approx(1 / GOLDEN, abs=1e-4)
    assert bo_radial.negative_count == 1


def test_benjamin_ono_sign_changes(bo_radial):
    assert [sign_changes(f) for f in bo_radial.eigenfields[:2]] == [0, 1]


def test_zero_mode_is_translation(bo_state):
    A, grid = assemble_lplus(bo_state, 1)
    spec = sector_spectrum(A, grid, k=2, zero_tol=1e-5 * free_gap(grid, 0.5))
    assert spec.near_zero.size == 1
    dq = grid.field(bo_state.Q.derivative(grid.nodes))
    assert cosine_similarity(spec.vector(0), dq.coeffs) > 1 - 1e-6


def test_nondegeneracy_report(bo_state):
    rep = nondegeneracy_report(bo_state)
    assert rep["pass"] and rep["ordered"]
    assert set(rep["sectors"]) == {0, 1}


@given(seed=st.integers(0, 2**16))
def test_lplus_solve_inverts_apply(seed, bo_state):
    g = bo_state.grid
    x = np.random.default_rng(seed).standard_normal(g.M) / (1 + np.arange(g.M))
    b = lplus_apply(g, bo_state.Q.values, 0.5, 1.0, x)
    assert np.allclose(lplus_solve(g, bo_state.Q.values, 0.5, 1.0, b), x, atol=1e-10)


def test_free_schrodinger_spectrum():
    g = make_grid(SectorIndex(2, 0), 10.0, 64)
    spec = sector_spectrum(schrodinger_matrix(g, 0.5, np.zeros(g.M)), g, k=5)
    assert np.allclose(spec.eigenvalues, g.eigenvalues[:5] ** 0.5, rtol=1e-12)


def test_sector_spectrum_rejects_asymmetric():
    g = make_grid(SectorIndex(1, 0), 10.0, 16)
    A = np.triu(np.ones((16, 16)))
    with pytest.raises(ValueError):
        sector_spectrum(A, g)


@pytest.mark.parametrize(
    "values, expected",
    [([1, 2, 3], 0), ([1, -1, 1, -1], 3), ([1, 0, -1], 1), ([1, 1e-12, -1e-12, 1], 0), ([-1, 0.5, 0, 0, -2], 2)],
)
def test_sign_changes(values, expected):
    assert sign_changes(np.array(values, dtype=float)) == expected


@given(k=st.integers(0, 8))
def test_sign_changes_of_sine(k):
    x = np.linspace(0, 1, 2001)[1:-1]
    assert sign_changes(np.sin((k + 1) * np.pi * x + 1e-3)) == k
