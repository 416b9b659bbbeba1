"""Fourier-Bessel discretization of radial functions on a ball.

A radial function in angular-momentum sector ``ell`` of R^N is expanded on
``[0, R]`` in the Dirichlet eigenfunctions of the sector Laplacian,

    e_k(r) = n_k r^{-(N-2)/2} J_nu(j_{nu,k} r / R),    nu = ell + (N-2)/2,

normalized so that the full R^N integral (angular factor included) of
``e_k**2`` is one.  Any function of ``-Delta_ell`` then acts diagonally on
the coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from scipy import special

__all__ = [
    "SectorIndex",
    "RadialGrid",
    "RadialField",
    "sphere_area",
    "bessel_zeros",
    "make_grid",
    "default_grid",
    "apply_multiplier",
    "fractional_laplacian",
    "log_laplacian_s",
    "norms",
    "inner",
]


def sphere_area(N: int) -> float:
    """Surface measure |S^{N-1}| (equal to 2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True)
class SectorIndex:
    N: int
    ell: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"dimension N must be >= 1, got {self.N}")
        if self.ell < 0:
            raise ValueError(f"ell must be >= 0, got {self.ell}")
        if self.N == 1 and self.ell > 1:
            raise ValueError("for N = 1 only ell in {0, 1} (even/odd) exists")

    @property
    def nu(self) -> float:
        return self.ell + (self.N - 2) / 2.0


def bessel_zeros(nu: float, count: int, rtol: float = 1e-13) -> np.ndarray:
    """First ``count`` positive zeros of J_nu, nu >= -1/2.

    McMahon's expansion seeds a Newton iteration; the ordering and spacing
    of the result are checked so a Newton jump to a neighbouring zero is
    caught rather than returned.
    """
    if nu < -0.5:
        raise ValueError("nu must be >= -1/2")
    k = np.arange(1, count + 1, dtype=float)
    beta = (k + nu / 2.0 - 0.25) * np.pi
    m = 4.0 * nu * nu
    x = beta - (m - 1) / (8 * beta) - 4 * (m - 1) * (7 * m - 31) / (3 * (8 * beta) ** 3)
    if nu > 0.5:
        # McMahon is poor for the first zeros of higher orders
        x[0] = max(x[0], nu + 1.8557571 * nu ** (1 / 3) + 1.033150 * nu ** (-1 / 3))
    for _ in range(60):
        step = special.jv(nu, x) / special.jvp(nu, x)
        x = x - step
        if np.all(np.abs(step) <= rtol * np.abs(x)):
            break
    else:
        raise RuntimeError(f"Bessel zero iteration for nu={nu} did not converge")
    gaps = np.diff(x)
    if x[0] <= max(nu, 0.0) or np.any(gaps < 2.0) or np.any(gaps > 4.5):
        raise RuntimeError(f"Bessel zeros for nu={nu} are misordered")
    return x


def _radial_basis(sector: SectorIndex, z: np.ndarray, R: float, r: np.ndarray) -> np.ndarray:
    """Unnormalized r^{-(N-2)/2} J_nu(z r / R), shape (len(r), len(z))."""
    nu = sector.nu
    p = (sector.N - 2) / 2.0
    r = np.asarray(r, dtype=float)
    k = z / R
    out = np.empty((r.size, z.size))
    pos = r > 0
    rp = r[pos][:, None]
    out[pos] = rp ** (-p) * special.jv(nu, rp * k[None, :])
    if np.any(~pos):
        out[~pos] = (k / 2.0) ** nu / math.gamma(nu + 1.0) if sector.ell == 0 else 0.0
    return out


def _radial_basis_dr(sector: SectorIndex, z: np.ndarray, R: float, r: np.ndarray) -> np.ndarray:
    nu = sector.nu
    p = (sector.N - 2) / 2.0
    r = np.asarray(r, dtype=float)
    k = z / R
    out = np.zeros((r.size, z.size))
    pos = r > 0
    rp = r[pos][:, None]
    x = rp * k[None, :]
    # d/dr [r^-p J_nu(kr)] = r^-p (-k J_{nu+1}(kr) + (ell/r) J_nu(kr))
    val = -k[None, :] * special.jv(nu + 1, x)
    if sector.ell:
        val = val + sector.ell / rp * special.jv(nu, x)
    out[pos] = rp ** (-p) * val
    if np.any(~pos) and sector.ell == 1:
        # e ~ r (k/2)^nu / Gamma(nu+1) near the origin; other sectors are flat there
        out[~pos] = (k / 2.0) ** nu / math.gamma(nu + 1.0)
    return out


class RadialGrid:
    """Fourier-Bessel grid of ``M`` modes on the ball of radius ``R``.

    Attributes
    ----------
    nodes : ndarray
        Collocation radii ``j_{nu,q} R / j_{nu,M+1}``.
    weights : ndarray
        Quadrature weights for ``int_0^R f(r) r^{N-1} dr``.
    eigenvalues : ndarray
        ``(j_{nu,k} / R)**2``, the Dirichlet eigenvalues of ``-Delta_ell``.
    synthesis, analysis : ndarray
        Coefficients-to-values matrix and its inverse.
    """

    def __init__(self, sector: SectorIndex, R: float, M: int):
        if M < 8:
            raise ValueError(f"need at least 8 modes, got M={M}")
        if not R > 0:
            raise ValueError(f"radius must be positive, got R={R}")
        self.sector = sector
        self.R = float(R)
        self.M = int(M)
        zeros = bessel_zeros(sector.nu, M + 1)
        self.zeros = zeros[:M]
        edge = zeros[M]
        nu = sector.nu
        self.area = sphere_area(sector.N)
        self.nodes = self.zeros * self.R / edge
        self.eigenvalues = (self.zeros / self.R) ** 2
        jn1 = np.abs(special.jv(nu + 1, self.zeros))
        self._norm = math.sqrt(2.0 / self.area) / (self.R * jn1)
        self.weights = 2.0 * self.R**2 / (edge**2 * jn1**2) * self.nodes ** (sector.N - 2)
        self.synthesis = self.basis(self.nodes)
        if abs(nu) == 0.5:
            # sine/cosine transform: orthogonal to rounding
            self.analysis = np.ascontiguousarray(self.synthesis.T * (self.area * self.weights))
        else:
            self.analysis = np.linalg.inv(self.synthesis)
        for arr in (self.nodes, self.weights, self.eigenvalues, self.synthesis, self.analysis):
            arr.setflags(write=False)

    def __repr__(self):
        s = self.sector
        return f"RadialGrid(N={s.N}, ell={s.ell}, R={self.R:g}, M={self.M})"

    @property
    def N(self) -> int:
        return self.sector.N

    def basis(self, r) -> np.ndarray:
        """Normalized basis values ``e_k(r)``, shape (len(r), M)."""
        return _radial_basis(self.sector, self.zeros, self.R, np.atleast_1d(r)) * self._norm

    def basis_dr(self, r) -> np.ndarray:
        """Radial derivatives ``e_k'(r)``, shape (len(r), M)."""
        return _radial_basis_dr(self.sector, self.zeros, self.R, np.atleast_1d(r)) * self._norm

    def forward(self, values) -> np.ndarray:
        return self.analysis @ np.asarray(values, dtype=float)

    def inverse(self, coeffs) -> np.ndarray:
        return self.synthesis @ np.asarray(coeffs, dtype=float)

    def integrate(self, values) -> float:
        """Full R^N integral of a radial function sampled at the nodes."""
        return self.area * float(np.dot(self.weights, values))

    def field(self, values) -> "RadialField":
        return RadialField(self, np.asarray(values, dtype=float))

    def from_coeffs(self, coeffs) -> "RadialField":
        coeffs = np.asarray(coeffs, dtype=float)
        f = RadialField(self, self.inverse(coeffs))
        f.__dict__["coeffs"] = coeffs
        return f

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "RadialField":
        return self.field(func(self.nodes))

    def mode(self, k: int) -> "RadialField":
        """The normalized basis function number ``k`` (1-based)."""
        c = np.zeros(self.M)
        c[k - 1] = 1.0
        return self.from_coeffs(c)


@lru_cache(maxsize=32)
def make_grid(sector: SectorIndex, R: float, M: int) -> RadialGrid:
    """Cached grid constructor; grids are immutable and shared."""
    return RadialGrid(sector, R, M)


def default_grid(N: int, ell: int = 0) -> RadialGrid:
    if N == 1:
        return make_grid(SectorIndex(N, ell), 200.0, 1024)
    return make_grid(SectorIndex(N, ell), 100.0, 768)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Samples of a radial function at the nodes of ``grid``."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.M,):
            raise ValueError(f"expected {self.grid.M} samples, got {self.values.shape}")

    @cached_property
    def coeffs(self) -> np.ndarray:
        return self.grid.forward(self.values)

    def __call__(self, r) -> np.ndarray:
        """Evaluate the spectral interpolant at arbitrary radii."""
        return self.grid.basis(r) @ self.coeffs

    def derivative(self, r=None) -> np.ndarray:
        """Spectral radial derivative, at the nodes unless ``r`` is given."""
        r = self.grid.nodes if r is None else r
        return self.grid.basis_dr(r) @ self.coeffs

    def __add__(self, other):
        return RadialField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return RadialField(self.grid, self.values - _vals(other))

    def __mul__(self, a):
        return RadialField(self.grid, self.values * _vals(a))

    __rmul__ = __mul__

    def __neg__(self):
        return RadialField(self.grid, -self.values)

    def l2(self) -> float:
        return math.sqrt(max(inner(self, self), 0.0))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def _vals(x):
    return x.values if isinstance(x, RadialField) else x


def inner(f: RadialField, g: RadialField) -> float:
    """L^2(R^N) inner product computed in coefficient space."""
    return float(np.dot(f.coeffs, g.coeffs))


def apply_multiplier(f: RadialField, m: Callable[[np.ndarray], np.ndarray]) -> RadialField:
    """Apply ``m(-Delta_ell)`` to ``f``."""
    if not np.all(np.isfinite(f.values)):
        raise ValueError("field contains non-finite samples")
    factors = np.asarray(m(f.grid.eigenvalues), dtype=float)
    if not np.all(np.isfinite(factors)):
        raise ValueError("multiplier is not finite on the grid eigenvalues")
    return f.grid.from_coeffs(factors * f.coeffs)


def fractional_laplacian(f: RadialField, s: float) -> RadialField:
    if not 0.0 < s <= 1.0:
        raise ValueError(f"order s must lie in (0, 1], got {s}")
    return apply_multiplier(f, lambda mu: mu**s)


def log_laplacian_s(f: RadialField, s: float) -> RadialField:
    """Apply ``(-Delta)^s log(-Delta)``, the s-derivative of the power."""
    return apply_multiplier(f, lambda mu: mu**s * np.log(mu))


def norms(f: RadialField, s: float, alpha: float) -> tuple[float, float, float]:
    """Mass, kinetic and potential integrals ``(M, T, V)`` over R^N.

    ``T`` is the spectral sum of ``mu_k**s c_k**2``; ``V`` integrates
    ``|f|**(alpha + 2)`` with the grid quadrature.
    """
    c = f.coeffs
    mass = float(np.dot(c, c))
    kinetic = float(np.dot(f.grid.eigenvalues**s * c, c))
    potential = f.grid.integrate(np.abs(f.values) ** (alpha + 2.0))
    return mass, kinetic, potential
