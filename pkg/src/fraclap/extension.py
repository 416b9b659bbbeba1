"""The s-harmonic extension to the upper half-space and the quantity H(r).

A field ``f = sum_k c_k e_k`` on a radial grid extends mode by mode,

    u(r, t) = sum_k c_k phi_s(sqrt(mu_k) t) e_k(r),
    phi_s(tau) = 2^{1-s}/Gamma(s) tau^s K_s(tau),

which solves ``div(t^a grad u) = 0`` with ``a = 1 - 2s`` and ``u(., 0) = f``.
With ``d_s = 2^{2s-1} Gamma(s)/Gamma(1-s)`` the weighted Neumann trace is
``lim t^a u_t = -(1/d_s) (-Delta)^s f`` and the weighted Dirichlet energy of
the extension equals ``(1/d_s) ||(-Delta)^{s/2} f||^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import ExtrapolationError
from .spectral import RadialField, RadialGrid, fractional_laplacian

__all__ = [
    "d_s",
    "ExtensionField",
    "MonotoneH",
    "extend",
    "default_t_grid",
    "log_t_quadrature",
    "mode_dn_limit",
    "profile_ode_residual",
    "dirichlet_neumann_check",
    "trace_energy",
    "trace_inequality_check",
    "monotone_H",
]


def d_s(s: float) -> float:
    """Dirichlet-Neumann constant ``2^{2s-1} Gamma(s) / Gamma(1-s)``."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    return 2.0 ** (2 * s - 1) * math.gamma(s) / math.gamma(1 - s)


def _check_s(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")


def default_t_grid(grid: RadialGrid, n: int = 80) -> np.ndarray:
    """Log-spaced levels over ``[1e-4, 50] / sqrt(mu_1)``."""
    return np.geomspace(1e-4, 50.0, n) / math.sqrt(grid.eigenvalues[0])


def log_t_quadrature(t_min: float, t_max: float, per_panel: int = 12, panel: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule in ``log t``; weights include the Jacobian."""
    n = max(1, int(math.ceil(math.log(t_max / t_min) / panel)))
    edges = np.linspace(math.log(t_min), math.log(t_max), n + 1)
    x, w = np.polynomial.legendre.leggauss(per_panel)
    a, b = edges[:-1, None], edges[1:, None]
    y = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    wy = (0.5 * (b - a) * w).ravel()
    t = np.exp(y)
    return t, wy * t


def _mode_profiles(s: float, sqrt_mu: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``phi(sqrt(mu_k) t_j)`` and ``d/dt`` of it, shape (M, len(t))."""
    tau = np.outer(sqrt_mu, t)
    phi, dphi = kernels.profile(s, tau)
    return phi, dphi * sqrt_mu[:, None]


@dataclass(eq=False)
class ExtensionField:
    """Extension of ``base`` sampled on the radial nodes times ``t_grid``.

    Arrays ``u``, ``u_r``, ``u_t`` and ``ta_u_t`` have shape
    ``(grid.M, len(t_grid))``.
    """

    base: RadialField
    s: float
    t_grid: np.ndarray
    profile: np.ndarray
    u: np.ndarray
    u_r: np.ndarray
    u_t: np.ndarray

    @property
    def a(self) -> float:
        return 1.0 - 2.0 * self.s

    @property
    def ta_u_t(self) -> np.ndarray:
        return self.t_grid ** self.a * self.u_t

    def at(self, t: float, r=None) -> np.ndarray:
        """``u(r, t)`` at one level, at the nodes unless ``r`` is given."""
        g = self.base.grid
        phi, _ = _mode_profiles(self.s, np.sqrt(g.eigenvalues), np.array([float(t)]))
        c = self.base.coeffs * phi[:, 0]
        return g.inverse(c) if r is None else g.basis(r) @ c

    def boundary_error(self, t: float = 1e-30) -> float:
        """Relative max-norm gap between ``u(., t)`` and the base field."""
        f = self.base.values
        return float(np.max(np.abs(self.at(t) - f)) / np.max(np.abs(f)))


def extend(f: RadialField, s: float, t_grid=None) -> ExtensionField:
    """Mode-wise s-harmonic extension of ``f``.

    Profiles beyond ``tau = 745`` underflow to zero.
    """
    _check_s(s)
    g = f.grid
    t = default_t_grid(g) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be positive and strictly ascending")
    phi, dphi = _mode_profiles(s, np.sqrt(g.eigenvalues), t)
    c = f.coeffs[:, None]
    u = g.synthesis @ (c * phi)
    u_t = g.synthesis @ (c * dphi)
    u_r = g.basis_dr(g.nodes) @ (c * phi)
    return ExtensionField(f, s, t, phi, u, u_r, u_t)


def profile_ode_residual(s: float, tau) -> float:
    """Residual of the profile equation ``(tau^a phi')' = tau^a phi``.

    Between consecutive levels the jump of ``tau^a phi'`` is compared with a
    Gauss-Legendre integral of ``tau^a phi``, so no second derivative or
    Bessel recurrence enters.  Each residual is relative to the largest term.
    """
    _check_s(s)
    tau = np.unique(np.asarray(tau, dtype=float))
    if tau.size < 2 or tau[0] <= 0:
        raise ValueError("need at least two positive levels")
    a = 1.0 - 2.0 * s
    phi, dphi = kernels.profile(s, tau)
    flux = tau**a * dphi
    worst = 0.0
    for lo, hi, f_lo, f_hi in zip(tau[:-1], tau[1:], flux[:-1], flux[1:]):
        x, w = log_t_quadrature(lo, hi, per_panel=16, panel=0.25)
        p, _ = kernels.profile(s, x)
        integral = float(np.dot(w, x**a * p))
        scale = max(abs(f_lo), abs(f_hi), abs(integral))
        if scale > 0:
            worst = max(worst, abs(f_hi - f_lo - integral) / scale)
    return worst


def _richardson(t: np.ndarray, est: np.ndarray, p: float) -> tuple[float, float]:
    """Extrapolate ``est(t) = L + C t^p`` from three levels ``t0 < t1 < t2``.

    Returns the limit from the two smallest levels and the one from the two
    largest; their gap measures stability.
    """
    q = t[1] / t[0]
    lo = (est[0] * q**p - est[1]) / (q**p - 1.0)
    q2 = t[2] / t[1]
    hi = (est[1] * q2**p - est[2]) / (q2**p - 1.0)
    return lo, hi


def _dn_estimates(s: float, sqrt_mu: float, t: np.ndarray) -> np.ndarray:
    _, dphi = kernels.profile(s, sqrt_mu * t)
    return t ** (1.0 - 2.0 * s) * sqrt_mu * dphi


def mode_dn_limit(s: float, mu: float, levels=(1e-6, 1e-5, 1e-4)) -> float:
    """``-lim_{t->0} t^a d/dt phi(sqrt(mu) t) / mu^s`` for one eigenvalue.

    The limit is extrapolated from three small levels (in units of
    ``1/sqrt(mu)``) with the leading correction ``t^{2-2s}``.
    """
    _check_s(s)
    k = math.sqrt(mu)
    t = np.asarray(levels, dtype=float) / k
    est = _dn_estimates(s, k, t)
    lo, hi = _richardson(t, est, 2.0 - 2.0 * s)
    return float(-lo / mu**s)


@dataclass
class DNReport:
    residual: float
    limit: np.ndarray
    reference: np.ndarray
    estimates: np.ndarray


def dirichlet_neumann_check(f: RadialField, s: float, levels=(1e-6, 1e-5, 1e-4)) -> DNReport:
    """Compare ``-d_s lim t^a u_t`` with ``(-Delta)^s f``.

    The limit is extrapolated from three levels scaled by the largest
    eigenvalue.  The residual is the relative L2 gap.

    Raises
    ------
    ExtrapolationError
        If successive differences of the estimates grow by more than 10x.
    """
    _check_s(s)
    g = f.grid
    kmax = math.sqrt(g.eigenvalues[-1])
    t = np.asarray(levels, dtype=float) / kmax
    sqrt_mu = np.sqrt(g.eigenvalues)
    _, dphi = _mode_profiles(s, sqrt_mu, t)
    per_mode = (t ** (1.0 - 2.0 * s))[None, :] * dphi
    p = 2.0 - 2.0 * s
    q0, q1 = t[1] / t[0], t[2] / t[1]
    lo = (per_mode[:, 0] * q0**p - per_mode[:, 1]) / (q0**p - 1.0)
    est = g.synthesis @ (f.coeffs[:, None] * per_mode)
    d01 = np.linalg.norm(est[:, 1] - est[:, 0])
    d12 = np.linalg.norm(est[:, 2] - est[:, 1])
    if d01 > 10.0 * d12 and d01 > 1e-14 * np.linalg.norm(est[:, 0]):
        raise ExtrapolationError(f"extrapolation unstable: level differences {d01:.3g} vs {d12:.3g}")
    limit_c = f.coeffs * lo
    ref_c = fractional_laplacian(f, s).coeffs
    gap = -d_s(s) * limit_c - ref_c
    res = float(np.linalg.norm(gap) / np.linalg.norm(ref_c))
    return DNReport(res, g.inverse(limit_c), g.inverse(ref_c), est)


def _profile_energy(s: float, tau: np.ndarray, w: np.ndarray, bump: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None, k: float) -> tuple[float, float]:
    """``int tau^a psi^2`` and ``int tau^a psi'^2`` for one scaled profile."""
    phi, dphi = kernels.profile(s, tau)
    if bump is not None:
        b, db = bump(tau / k)
        dphi = dphi * (1 + b) + phi * db / k
        phi = phi * (1 + b)
    wa = w * tau ** (1.0 - 2.0 * s)
    return float(np.dot(wa, phi**2)), float(np.dot(wa, dphi**2))


def trace_energy(f: RadialField, s: float, bump=None, tau_range=(1e-14, 60.0)) -> float:
    """Weighted Dirichlet energy ``int int t^a |grad w|^2`` of an extension.

    ``w`` is the s-harmonic extension of ``f``, multiplied by ``1 + bump(t)``
    when ``bump`` is given; ``bump`` returns values and derivatives in ``t``
    and must vanish at ``t = 0``.  The spatial integral is exact in the
    eigenbasis, the ``t`` integral is Gauss-Legendre in ``log t`` with the
    singular head integrated analytically.
    """
    _check_s(s)
    g = f.grid
    c2 = f.coeffs**2
    a = 1.0 - 2.0 * s
    tau, w = log_t_quadrature(*tau_range)
    t0 = tau_range[0]
    head_dphi = (1.0 / d_s(s)) ** 2 * t0 ** (2 * s) / (2 * s)
    head_phi = t0 ** (1 + a) / (1 + a)
    total = 0.0
    for mu, cc in zip(g.eigenvalues, c2):
        if cc == 0.0:
            continue
        k = math.sqrt(mu)
        e_phi, e_dphi = _profile_energy(s, tau, w, bump, k)
        # t = tau / k: dt t^a = k^{-1-a} dtau tau^a, d/dt = k d/dtau
        per = mu * (e_phi + head_phi) + mu * (e_dphi + head_dphi)
        total += cc * per * k ** (-1.0 - a)
    return float(total)


@dataclass
class TraceReport:
    lhs: float
    rhs: float
    ratio: float


def trace_inequality_check(f: RadialField, s: float, bump=None) -> TraceReport:
    """Weighted extension energy against ``(1/d_s) ||(-Delta)^{s/2} f||^2``."""
    rhs = float(np.dot(f.grid.eigenvalues**s, f.coeffs**2)) / d_s(s)
    lhs = trace_energy(f, s, bump=bump)
    return TraceReport(lhs, rhs, lhs / rhs)


@dataclass
class MonotoneH:
    """Samples of ``H(r) = d_s int t^a/2 (u_r^2 - u_t^2) dt - V u^2 / 2``."""

    radii: np.ndarray
    H_values: np.ndarray
    V: RadialField
    d_s: float
    H0: float
    u0: float
    neumann_energy0: float

    @property
    def H_inf(self) -> float:
        return float(self.H_values[-1])

    def increments(self) -> np.ndarray:
        return np.diff(self.H_values)

    def max_increase(self) -> float:
        """Largest increment relative to ``max |H|``."""
        scale = max(float(np.max(np.abs(self.H_values))), abs(self.H0))
        return float(np.max(self.increments(), initial=-math.inf) / scale)

    def is_monotone(self, slack: float = 1e-6) -> bool:
        return self.max_increase() <= slack

    def decays(self, tol: float = 1e-4) -> bool:
        return abs(self.H_inf) <= tol * abs(self.H0)

    def origin_bound_gap(self) -> float:
        """``H(0) + V(0) u(0)^2 / 2``; non-positive in exact arithmetic."""
        return float(self.H0 + 0.5 * self.V(np.array([0.0]))[0] * self.u0**2)


def monotone_H(u_boundary: RadialField, V: RadialField, s: float, r_frac: float = 0.8, per_panel: int = 12) -> MonotoneH:
    """Sample ``H(r)`` on the nodes inside ``r_frac * R`` and at the origin.

    ``V`` is the potential with any eigenvalue already folded in, so that
    ``(-Delta)^s u + V u = 0``.
    """
    _check_s(s)
    g = u_boundary.grid
    if V.grid is not g:
        V = g.field(V(g.nodes))
    ds = d_s(s)
    a = 1.0 - 2.0 * s
    mu = g.eigenvalues
    sqrt_mu = np.sqrt(mu)
    t0 = 1e-8 / sqrt_mu[-1]
    t, w = log_t_quadrature(t0, 60.0 / sqrt_mu[0], per_panel=per_panel)
    phi, dphi = _mode_profiles(s, sqrt_mu, t)
    c = u_boundary.coeffs
    radii = np.concatenate([[0.0], g.nodes[g.nodes <= r_frac * g.R]])
    B = g.basis(radii)
    Br = g.basis_dr(radii)
    u_r = Br @ (c[:, None] * phi)
    u_t = B @ (c[:, None] * dphi)
    wa = w * t**a
    integral = 0.5 * ((u_r**2) @ wa - (u_t**2) @ wa)
    # heads on (0, t0): u_r ~ u_r(r, 0) and t^a u_t ~ D = -(1/d_s)(-Delta)^s u
    D = -(B @ (mu**s * c)) / ds
    ur0 = Br @ c
    head = 0.5 * (ur0**2 * t0 ** (1 + a) / (1 + a) - D**2 * t0 ** (2 * s) / (2 * s))
    u0 = B @ c
    Vr = V(radii)
    H = ds * (integral + head) - 0.5 * Vr * u0**2
    neumann0 = float((u_t[0] ** 2) @ wa + D[0] ** 2 * t0 ** (2 * s) / (2 * s))
    return MonotoneH(radii[1:], H[1:], V, ds, float(H[0]), float(u0[0]), neumann0)
