import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from fraclap.spectral import (
    RadialGrid,
    SectorIndex,
    apply_multiplier,
    bessel_zeros,
    fractional_laplacian,
    inner,
    log_laplacian_s,
    make_grid,
    norms,
    sphere_area,
)


@pytest.mark.parametrize("N, area", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi**2)])
def test_sphere_area(N, area):
    assert sphere_area(N) == pytest.approx(area, rel=1e-14)


@given(st.integers(min_value=0, max_value=6))
def test_bessel_zeros_integer_orders(nu):
    assert np.allclose(bessel_zeros(nu, 200), special.jn_zeros(nu, 200), rtol=1e-13, atol=0)


def test_bessel_zeros_half_order():
    # J_{1/2}(x) is proportional to sin(x)/sqrt(x)
    k = np.arange(1, 301)
    assert np.allclose(bessel_zeros(0.5, 300), k * np.pi, rtol=1e-14)


def test_bessel_zeros_rejects_low_order():
    with pytest.raises(ValueError):
        bessel_zeros(-0.7, 5)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("ell", [0, 1])
def test_transform_round_trip(N, ell):
    g = make_grid(SectorIndex(N, ell), 15.0, 96)
    assert np.abs(g.analysis @ g.synthesis - np.eye(g.M)).max() < 1e-10


@pytest.mark.parametrize("N", [1, 2, 3])
def test_gaussian_integral(N):
    g = make_grid(SectorIndex(N, 0), 12.0, 128)
    assert g.integrate(np.exp(-g.nodes**2)) == pytest.approx(math.pi ** (N / 2), rel=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_mass_is_parseval(N):
    g = make_grid(SectorIndex(N, 0), 12.0, 128)
    f = g.sample(lambda r: np.exp(-(r**2)))
    M, _, _ = norms(f, 0.5, 1.0)
    assert M == pytest.approx((math.pi / 2) ** (N / 2), rel=1e-12)
    assert inner(f, f) == pytest.approx(g.integrate(f.values**2), rel=1e-12)


def _gaussian_frac_error(N, s, R, M):
    # (-Delta)^s exp(-|x|^2) = 4^s Gamma(N/2+s)/Gamma(N/2) 1F1(N/2+s; N/2; -r^2) on R^N
    g = make_grid(SectorIndex(N, 0), R, M)
    f = g.sample(lambda r: np.exp(-(r**2)))
    r = g.nodes
    exact = 4**s * math.gamma(N / 2 + s) / math.gamma(N / 2) * special.hyp1f1(N / 2 + s, N / 2, -(r**2))
    return np.abs(fractional_laplacian(f, s).values - exact)[r < 6.0].max()


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_fractional_laplacian_of_gaussian(N, s):
    # the Dirichlet ball converges to R^N at rate R^-(N+2s)
    e12 = _gaussian_frac_error(N, s, 12.0, 256)
    e48 = _gaussian_frac_error(N, s, 48.0, 1024)
    assert e48 < 1e-3
    assert e12 / e48 > 0.5 * 4.0 ** (N + 2 * s)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_fractional_laplacian_of_gaussian_s1(N):
    assert _gaussian_frac_error(N, 1.0, 12.0, 256) < 1e-9


def test_laplacian_of_gaussian_s1():
    g = make_grid(SectorIndex(3, 0), 12.0, 256)
    f = g.sample(lambda r: np.exp(-(r**2)))
    r = g.nodes
    assert np.allclose(fractional_laplacian(f, 1.0).values, (6 - 4 * r**2) * np.exp(-(r**2)), atol=1e-9)


@given(st.floats(0.05, 0.5), st.floats(0.05, 0.5))
def test_power_semigroup(s1, s2):
    g = make_grid(SectorIndex(2, 0), 10.0, 64)
    f = g.sample(lambda r: np.exp(-(r**2)) * (1 + r))
    a = fractional_laplacian(fractional_laplacian(f, s1), s2)
    b = fractional_laplacian(f, s1 + s2)
    assert np.allclose(a.coeffs, b.coeffs, rtol=1e-12, atol=1e-12 * np.abs(b.coeffs).max())


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_multiplier_is_linear(a, b):
    g = make_grid(SectorIndex(1, 0), 10.0, 64)
    f = g.sample(lambda r: np.exp(-(r**2)))
    h = g.sample(lambda r: 1 / (1 + r**4))
    m = lambda mu: 1 / (1 + mu)
    lhs = apply_multiplier(f * a + h * b, m)
    rhs = apply_multiplier(f, m) * a + apply_multiplier(h, m) * b
    assert np.allclose(lhs.values, rhs.values, atol=1e-12)


def test_log_laplacian_is_s_derivative():
    g = make_grid(SectorIndex(1, 0), 10.0, 128)
    f = g.sample(lambda r: np.exp(-(r**2)))
    s, h = 0.6, 1e-5
    fd = (fractional_laplacian(f, s + h).coeffs - fractional_laplacian(f, s - h).coeffs) / (2 * h)
    assert np.allclose(log_laplacian_s(f, s).coeffs, fd, atol=1e-8)


def test_interpolant_and_derivative(small_grid_3d):
    f = small_grid_3d.sample(lambda r: np.exp(-(r**2)))
    r = np.linspace(0, 5, 41)
    assert np.allclose(f(r), np.exp(-(r**2)), atol=1e-11)
    assert np.allclose(f.derivative(r), -2 * r * np.exp(-(r**2)), atol=1e-10)


def test_mode_is_normalized(small_grid_3d):
    e3 = small_grid_3d.mode(3)
    assert e3.l2() == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize(
    "args, exc",
    [((SectorIndex(1, 0), 10.0, 4), ValueError), ((SectorIndex(1, 0), -1.0, 32), ValueError)],
)
def test_grid_rejects_bad_sizes(args, exc):
    with pytest.raises(exc):
        RadialGrid(*args)


def test_sector_index_validation():
    with pytest.raises(ValueError):
        SectorIndex(1, 2)
    with pytest.raises(ValueError):
        SectorIndex(0, 0)
    assert SectorIndex(3, 1).nu == 1.5


def test_fractional_order_range(small_grid_3d):
    f = small_grid_3d.sample(lambda r: np.exp(-(r**2)))
    with pytest.raises(ValueError):
        fractional_laplacian(f, 1.5)


def test_nonfinite_field_rejected(small_grid_3d):
    v = np.ones(small_grid_3d.M)
    v[3] = np.nan
    with pytest.raises(ValueError):
        fractional_laplacian(small_grid_3d.field(v), 0.5)
