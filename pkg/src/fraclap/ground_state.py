"""Ground states of (-Delta)^s Q + Q - |Q|^alpha Q = 0.

The profile is found by Petviashvili's normalized fixed-point iteration and
then polished by Newton's method with the radial linearized operator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import linalg

from .errors import NewtonSingularError, NoPlateauError, StalledError
from .linearized import lplus_solve
from .spectral import RadialField, RadialGrid, norms

__all__ = [
    "ProblemParams",
    "GroundState",
    "alpha_star",
    "weinstein_J",
    "residual",
    "solve_ground_state",
    "newton_polish",
    "pohozaev_check",
    "tail_fit",
    "initial_profile",
]


def alpha_star(s: float, N: int) -> float:
    """Upper end of the admissible power range: 4s/(N-2s), infinite if s >= N/2."""
    return 4.0 * s / (N - 2.0 * s) if s < N / 2.0 else math.inf


@dataclass(frozen=True)
class ProblemParams:
    N: int
    s: float
    alpha: float

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not 0.0 < self.s <= 1.0:
            raise ValueError(f"s must lie in (0, 1], got {self.s}")
        if not 0.0 < self.alpha < alpha_star(self.s, self.N):
            raise ValueError(
                f"alpha={self.alpha} is not admissible: need 0 < alpha < "
                f"alpha_*(s={self.s}, N={self.N}) = {alpha_star(self.s, self.N):.6g}"
            )

    def at(self, s: float) -> "ProblemParams":
        return replace(self, s=s)


@dataclass
class GroundState:
    params: ProblemParams
    Q: RadialField
    M: float
    T: float
    V: float
    pohozaev1_residual: float
    pohozaev2_residual: float
    residual: float
    iterations: int
    converged: bool
    weinstein_J: float
    tail_constant: float | None = None
    tail_residual: float | None = None

    @property
    def grid(self) -> RadialGrid:
        return self.Q.grid

    def summary(self) -> dict:
        p = self.params
        return {
            "N": p.N,
            "s": p.s,
            "alpha": p.alpha,
            "R": self.grid.R,
            "modes": self.grid.M,
            "Q0": float(self.Q(np.array([0.0]))[0]),
            "mass": self.M,
            "kinetic": self.T,
            "potential": self.V,
            "pohozaev1_residual": self.pohozaev1_residual,
            "pohozaev2_residual": self.pohozaev2_residual,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "weinstein_J": self.weinstein_J,
            "tail_constant": self.tail_constant,
            "tail_residual": self.tail_residual,
        }


def weinstein_J(u: RadialField, params: ProblemParams) -> float:
    """Gagliardo-Nirenberg-Sobolev quotient T^{Na/4s} M^{(a/4s)(2s-N)+1} / V."""
    N, s, a = params.N, params.s, params.alpha
    M, T, V = norms(u, s, a)
    if V == 0.0:
        raise ValueError("J is undefined for the zero function")
    return T ** (N * a / (4 * s)) * M ** ((a / (4 * s)) * (2 * s - N) + 1) / V


def _nonlinearity(q: np.ndarray, alpha: float) -> np.ndarray:
    return np.abs(q) ** alpha * q


def residual(Q: RadialField, params: ProblemParams) -> float:
    """Relative L^2 residual of the profile equation, recomputed from scratch."""
    g = Q.grid
    c = Q.coeffs
    r = (g.eigenvalues**params.s + 1.0) * c - g.forward(_nonlinearity(Q.values, params.alpha))
    return float(np.linalg.norm(r) / np.linalg.norm(c))


def initial_profile(grid: RadialGrid, kind: str = "gaussian", width: float | None = None, height: float = 1.0) -> RadialField:
    w = min(1.5, grid.R / 20.0) if width is None else width
    r = grid.nodes / w
    shapes: dict[str, Callable[[np.ndarray], np.ndarray]] = {
        "gaussian": lambda x: np.exp(-(x**2)),
        "lorentzian": lambda x: 1.0 / (1.0 + x**2),
        "sech": lambda x: 1.0 / np.cosh(x),
    }
    try:
        return grid.field(height * shapes[kind](r))
    except KeyError:
        raise ValueError(f"unknown initial profile {kind!r}") from None


def petviashvili(Q: RadialField, params: ProblemParams, max_iter: int = 500, switch_tol: float = 1e-4) -> tuple[RadialField, int]:
    g = Q.grid
    s, a = params.s, params.alpha
    symbol = g.eigenvalues**s + 1.0
    power = (a + 1.0) / a
    c = Q.coeffs
    for it in range(1, max_iter + 1):
        nl = g.forward(_nonlinearity(g.inverse(c), a))
        gamma = float(np.dot(c, symbol * c) / np.dot(c, nl))
        if not np.isfinite(gamma) or gamma <= 0:
            raise StalledError(f"Petviashvili factor became {gamma} at iteration {it}")
        c = gamma**power * nl / symbol
        if abs(gamma - 1.0) < switch_tol:
            return g.from_coeffs(c), it
    raise StalledError(f"Petviashvili factor still {gamma:.6g} after {max_iter} iterations")


def newton_polish(Q: RadialField, params: ProblemParams, tol: float = 1e-9, max_iter: int = 50) -> tuple[RadialField, float, int]:
    """Newton iteration in coefficient space with the radial L_+ as Jacobian.

    Iterates until the residual is below ``tol * 1e-3`` or stops improving.
    """
    g = Q.grid
    s, a = params.s, params.alpha
    symbol = g.eigenvalues**s + 1.0
    c = Q.coeffs.copy()
    best = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        q = g.inverse(c)
        r = symbol * c - g.forward(_nonlinearity(q, a))
        res = float(np.linalg.norm(r) / np.linalg.norm(c))
        if res < tol * 1e-3 or (res < tol and res > 0.5 * best):
            break
        best = min(best, res)
        try:
            c = c - lplus_solve(g, q, s, a, r)
        except NewtonSingularError as exc:
            raise NewtonSingularError(f"Newton iteration {it}: {exc}") from None
    Qn = g.from_coeffs(c)
    return Qn, residual(Qn, params), it


def pohozaev_residuals(N: int, s: float, alpha: float, M: float, T: float, V: float) -> tuple[float, float]:
    res1 = abs(T + M - V) / V
    res2 = abs((N - 2 * s) * T / 2 + N * M / 2 - N * V / (alpha + 2)) / V
    return res1, res2


def build_state(Q: RadialField, params: ProblemParams, iterations: int, tol: float = 1e-9) -> GroundState:
    M, T, V = norms(Q, params.s, params.alpha)
    res = residual(Q, params)
    p1, p2 = pohozaev_residuals(params.N, params.s, params.alpha, M, T, V)
    gs = GroundState(
        params=params,
        Q=Q,
        M=M,
        T=T,
        V=V,
        pohozaev1_residual=p1,
        pohozaev2_residual=p2,
        residual=res,
        iterations=iterations,
        converged=res < tol,
        weinstein_J=weinstein_J(Q, params),
    )
    try:
        gs.tail_constant, gs.tail_residual = tail_fit(gs)
    except NoPlateauError as exc:
        gs.tail_residual = exc.residual
    return gs


def solve_ground_state(
    params: ProblemParams,
    grid: RadialGrid,
    init: RadialField | str = "default",
    tol: float = 1e-9,
    max_iter: int = 500,
    newton_iter: int = 50,
) -> GroundState:
    """Petviashvili iteration followed by Newton polishing.

    ``init`` is a positive field on ``grid`` or the name of a built-in shape
    ("default"/"gaussian", "lorentzian", "sech").
    """
    if grid.sector.ell != 0:
        raise ValueError("ground states live in the radial (ell = 0) sector")
    if grid.N != params.N:
        raise ValueError("grid dimension does not match the problem")
    if isinstance(init, str):
        init = initial_profile(grid, "gaussian" if init == "default" else init)
    Q, n_petv = petviashvili(init, params, max_iter=max_iter)
    Q, res, n_newton = newton_polish(Q, params, tol=tol, max_iter=newton_iter)
    return build_state(Q, params, n_petv + n_newton, tol)


def pohozaev_check(gs: GroundState) -> tuple[float, float]:
    """Relative residuals of T+M=V and (N-2s)T/2 + NM/2 = NV/(alpha+2)."""
    p = gs.params
    M, T, V = norms(gs.Q, p.s, p.alpha)
    return pohozaev_residuals(p.N, p.s, p.alpha, M, T, V)


def tail_fit(gs: GroundState, window: tuple[float, float] = (0.1, 0.4), max_residual: float = 0.1) -> tuple[float, float]:
    """Plateau of r^{N+2s} Q(r) on an inner window of the ball.

    The Dirichlet ball depresses the profile nonlocally, roughly like
    ``(r/R)**2``, so the fit is ``C + A r^{-2s} + B (r/R)^2`` and ``C`` is
    returned together with the relative variation of the corrected data.

    Raises
    ------
    NoPlateauError
        If the variation exceeds ``max_residual`` or ``C`` is not positive.
    """
    g = gs.grid
    p = gs.params
    r = g.nodes
    sel = (r >= window[0] * g.R) & (r <= window[1] * g.R)
    if sel.sum() < 4:
        raise NoPlateauError("tail window holds fewer than 4 nodes", residual=math.inf)
    rs = r[sel]
    y = rs ** (p.N + 2 * p.s) * gs.Q.values[sel]
    X = np.stack([np.ones_like(rs), rs ** (-2 * p.s), (rs / g.R) ** 2], axis=1)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    C = float(coef[0])
    yc = y - X[:, 1:] @ coef[1:]
    resid = float((yc.max() - yc.min()) / abs(C)) if C != 0 else math.inf
    if not (resid <= max_residual and C > 0):
        raise NoPlateauError(f"no plateau of r^(N+2s) Q: relative variation {resid:.3g}", residual=resid)
    return C, resid
