import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from fraclap.errors import BracketError
from fraclap.schrodinger import (
    PotentialSpec,
    eigen_tail_fit,
    find_two_state_coupling,
    homotopy_operator,
    homotopy_run,
    kato_form_check,
    origin_ratio,
    predicted_tail_coefficient,
    radial_spectrum,
    schrodinger_grid,
    simplicity_gap,
    trial_coupling_bound,
    trial_matrices,
)
from fraclap.spectral import SectorIndex, make_grid, sphere_area

WELL = {1: 11.0, 3: 22.0}


def radial_quad(N, f):
    return sphere_area(N) * integrate.quad(lambda r: r ** (N - 1) * f(r), 0, np.inf, epsabs=1e-14, epsrel=1e-13)[0]


def trial_states(N):
    n1 = math.pi ** (-N / 4)
    n2 = (N * math.pi ** (N / 2) / 2) ** -0.5
    return (lambda r: n1 * np.exp(-(r**2) / 2)), (lambda r: n2 * (r**2 - N / 2) * np.exp(-(r**2) / 2))


@pytest.mark.parametrize("N", [1, 2, 3])
def test_trial_overlap_is_identity(N):
    S, _, _ = trial_matrices(0.5, N)
    assert np.allclose(S, np.eye(2), atol=1e-14)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_trial_matrices_by_quadrature(N):
    p1, p2 = trial_states(N)
    _, T, Vg = trial_matrices(1.0, N)
    # Hermite functions: -Delta has diagonal N/2, (N+4)/2 and couples like -r^2
    assert T[0, 0] == pytest.approx(N / 2, rel=1e-13)
    assert T[1, 1] == pytest.approx((N + 4) / 2, rel=1e-13)
    assert T[0, 1] == pytest.approx(-radial_quad(N, lambda r: r**2 * p1(r) * p2(r)), rel=1e-10)
    w = lambda r: np.exp(-(r**2))
    exact = [[radial_quad(N, lambda r: w(r) * a(r) * b(r)) for b in (p1, p2)] for a in (p1, p2)]
    assert np.allclose(Vg, exact, rtol=1e-10)


@pytest.mark.parametrize("N, s", [(1, 0.5), (3, 0.5), (1, 0.75)])
def test_coupling_below_trial_bound(N, s):
    g_star, bound = find_two_state_coupling(s, N, rtol=1e-2)
    assert 0 < g_star <= bound * (1 + 1e-2)


def test_coupling_bracket_failure():
    with pytest.raises(BracketError):
        find_two_state_coupling(0.5, 1, g_max=0.5)


@pytest.fixture(scope="module", params=[1, 3])
def well_spectrum(request):
    N = request.param
    grid = schrodinger_grid(N)
    V = PotentialSpec.gaussian(WELL[N])
    return N, V, radial_spectrum(0.5, V, grid, k=3)


def test_two_simple_bound_states(well_spectrum):
    _, _, spec = well_spectrum
    assert spec.eigenvalues[0] < spec.eigenvalues[1] < 0
    assert simplicity_gap(spec) > 1e-3


def test_eigenfunctions_do_not_vanish_at_origin(well_spectrum):
    _, _, spec = well_spectrum
    assert all(origin_ratio(f) > 1e-3 for f in spec.eigenfields[:2])


def test_ground_state_tail_matches_resolvent(well_spectrum):
    N, V, spec = well_spectrum
    psi, E = spec.eigenfields[0], spec.eigenvalues[0]
    C, _ = eigen_tail_fit(psi, 0.5, E)
    assert C == pytest.approx(predicted_tail_coefficient(psi, 0.5, E, V), rel=0.05)


@pytest.mark.parametrize("N", [1, 3])
def test_local_tail_is_exponential(N):
    grid = make_grid(SectorIndex(N, 0), 30.0, 512)
    spec = radial_spectrum(1.0, PotentialSpec.gaussian(WELL[N]), grid, k=1)
    slope, rel = eigen_tail_fit(spec.eigenfields[0], 1.0, spec.eigenvalues[0])
    assert slope < 0 and rel < 0.02


def test_tail_fit_needs_bound_state(well_spectrum):
    _, _, spec = well_spectrum
    with pytest.raises(ValueError):
        eigen_tail_fit(spec.eigenfields[0], 0.5, 0.1)


@given(k=st.integers(1, 5), s=st.sampled_from([0.25, 0.5, 0.75, 1.0]))
def test_kato_inequality(k, s):
    g = make_grid(SectorIndex(2, 0), 20.0, 128)
    f = g.sample(lambda r: np.cos(k * r) * np.exp(-(r**2) / 4))
    abs_form, form = kato_form_check(f, s)
    assert abs_form <= form * (1 + 1e-10)


@pytest.mark.parametrize("kappa, other", [(1 / 3, 1 / 3 + 1e-15), (2 / 3, 2 / 3 + 1e-15)])
def test_homotopy_legs_join(kappa, other):
    V, W = PotentialSpec.gaussian(11.0), PotentialSpec.gaussian(15.0)
    grid = schrodinger_grid(1)
    specs = []
    for k in (kappa, other):
        _, sk, pot = homotopy_operator(k, 0.5, V, W)
        specs.append(radial_spectrum(sk, pot(grid.nodes), grid, k=3).eigenvalues)
    assert np.allclose(specs[0], specs[1], atol=1e-10)


def test_homotopy_keeps_two_states():
    V = PotentialSpec.gaussian(11.0)
    states = homotopy_run(0.5, V, V, schrodinger_grid(1), steps_per_leg=6)
    assert len(states) == 19
    assert all(st.E1 < st.E2 < 0 and st.sign_changes == 1 for st in states)
    assert states[-1].s_kappa == 1.0


def test_homotopy_rejects_kappa():
    V = PotentialSpec.gaussian(1.0)
    with pytest.raises(ValueError):
        homotopy_operator(1.5, 0.5, V, V)


@pytest.mark.parametrize("kw", [dict(kind="gaussian", g=-1.0), dict(kind="sampled"), dict(kind="cubic")])
def test_potential_spec_validation(kw):
    with pytest.raises(ValueError):
        PotentialSpec(**kw)
