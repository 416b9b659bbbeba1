"""Continuation of the ground-state branch in the order s.

Differentiating the profile equation in ``s`` gives the tangent equation

    L_+ dQ/ds = -(-Delta)^s log(-Delta) Q,

which serves as the predictor; Newton's method on a frozen grid corrects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchStallError, FraclapError, NewtonSingularError
from .ground_state import GroundState, ProblemParams, build_state, initial_profile, newton_polish, solve_ground_state
from .linearized import assemble_lplus, lplus_apply, lplus_solve, sector_spectrum
from .spectral import RadialField, RadialGrid, inner, log_laplacian_s

__all__ = [
    "DegenerateLplusError",
    "BranchPoint",
    "Branch",
    "tangent",
    "tangent_residual",
    "scaling_generator_residual",
    "mass_derivative_identity",
    "continue_branch",
    "mass_derivative_check",
    "uniqueness_probe",
]


class DegenerateLplusError(NewtonSingularError):
    """The radial L_+ is numerically singular along the branch."""


def _tangent_rhs(gs: GroundState) -> np.ndarray:
    return -log_laplacian_s(gs.Q, gs.params.s).coeffs


def tangent(gs: GroundState) -> RadialField:
    """Solve ``L_+ dQds = -(-Delta)^s log(-Delta) Q`` on the radial grid.

    Raises
    ------
    DegenerateLplusError
        If the radial L_+ is numerically singular.
    """
    p = gs.params
    try:
        x = lplus_solve(gs.grid, gs.Q.values, p.s, p.alpha, _tangent_rhs(gs))
    except NewtonSingularError as exc:
        raise DegenerateLplusError(f"degenerate L_+ at s = {p.s}: {exc}") from None
    return gs.grid.from_coeffs(x)


def tangent_residual(gs: GroundState, dQ: RadialField) -> float:
    p = gs.params
    rhs = _tangent_rhs(gs)
    lhs = lplus_apply(gs.grid, gs.Q.values, p.s, p.alpha, dQ.coeffs)
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))


def scaling_generator_residual(gs: GroundState) -> float:
    """Relative residual of ``L_+ ((2s/alpha) Q + r Q') = -2s Q``."""
    p = gs.params
    g = gs.grid
    gen = g.field((2 * p.s / p.alpha) * gs.Q.values + g.nodes * gs.Q.derivative())
    lhs = lplus_apply(g, gs.Q.values, p.s, p.alpha, gen.coeffs)
    rhs = -2 * p.s * gs.Q.coeffs
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))


def mass_derivative_identity(gs: GroundState) -> float:
    """``dM/ds`` from ``(1/2s)[(4s/alpha + 2s - N)(Q, A Q) + 2 (Q, (-Delta)^s Q)]``.

    ``A = (-Delta)^s log(-Delta)``.
    """
    p = gs.params
    qaq = inner(gs.Q, log_laplacian_s(gs.Q, p.s))
    return ((4 * p.s / p.alpha + 2 * p.s - p.N) * qaq + 2 * gs.T) / (2 * p.s)


@dataclass
class BranchPoint:
    s: float
    Q: GroundState = field(repr=False)
    dQds: RadialField = field(repr=False)
    M: float
    T: float
    V: float
    dMds_analytic: float
    dMds_numeric: float = math.nan
    tangent_residual: float = math.nan
    morse_index: int = -1
    corrector_iterations: int = 0

    def row(self) -> dict:
        return {
            "s": self.s,
            "M": self.M,
            "T": self.T,
            "V": self.V,
            "dMds_analytic": self.dMds_analytic,
            "dMds_numeric": self.dMds_numeric,
            "morse_index": self.morse_index,
            "tangent_residual": self.tangent_residual,
            "pohozaev1": self.Q.pohozaev1_residual,
            "pohozaev2": self.Q.pohozaev2_residual,
            "Q0": float(self.Q.Q(np.array([0.0]))[0]),
        }


@dataclass
class Branch:
    N: int
    alpha: float
    s_start: float
    s_end: float
    points: list[BranchPoint]

    def norm_range(self, name: str) -> tuple[float, float]:
        v = [getattr(p, name) for p in self.points]
        return min(v), max(v)

    def band_ratios(self) -> dict[str, float]:
        """max/min of each norm relative to its value at the first point."""
        out = {}
        for name in ("M", "T", "V"):
            ref = getattr(self.points[0], name)
            lo, hi = self.norm_range(name)
            out[name] = max(hi / ref, ref / lo)
        return out

    @property
    def endpoint(self) -> GroundState:
        return self.points[-1].Q


def _morse_index(gs: GroundState) -> int:
    A, grid = assemble_lplus(gs, 0)
    return sector_spectrum(A, grid, k=2).negative_count


def _make_point(gs: GroundState, corrector_iterations: int, morse: bool) -> BranchPoint:
    dQ = tangent(gs)
    return BranchPoint(
        s=gs.params.s,
        Q=gs,
        dQds=dQ,
        M=gs.M,
        T=gs.T,
        V=gs.V,
        dMds_analytic=mass_derivative_identity(gs),
        tangent_residual=tangent_residual(gs, dQ),
        morse_index=_morse_index(gs) if morse else -1,
        corrector_iterations=corrector_iterations,
    )


def _correct(pred: RadialField, params: ProblemParams, tol: float) -> tuple[GroundState, int]:
    Q, res, it = newton_polish(pred, params, tol=tol)
    if not (res < tol and np.all(Q.values[: max(1, Q.grid.M // 4)] > -1e-8 * np.abs(Q.values).max())):
        raise FraclapError(f"corrector did not converge to a positive profile at s = {params.s} (residual {res:.2e})")
    return build_state(Q, params, it, tol), it


def continue_branch(
    params: ProblemParams,
    grid: RadialGrid,
    s_start: float = 1.0,
    s_end: float = 0.5,
    step: float = 0.01,
    tol: float = 1e-9,
    max_halvings: int = 6,
    morse: bool = True,
    start: GroundState | None = None,
) -> Branch:
    """Tangent-predictor, Newton-corrector continuation from ``s_start`` to ``s_end``.

    ``step`` is the nominal magnitude in ``[1e-3, 0.05]``; a failed corrector
    halves it (at most ``max_halvings`` times) and a success restores it
    towards the nominal value.  ``params.s`` is ignored.

    Raises
    ------
    BranchStallError
        If the step falls below ``1e-3`` or the halvings run out.
    """
    if not 1e-3 <= step <= 0.05:
        raise ValueError("nominal step must lie in [1e-3, 0.05]")
    if not (0.0 < s_end <= 1.0 and 0.0 < s_start <= 1.0):
        raise ValueError("s_start and s_end must lie in (0, 1]")
    direction = -1.0 if s_end < s_start else 1.0
    gs = start if start is not None else solve_ground_state(params.at(s_start), grid, tol=tol)
    points = [_make_point(gs, gs.iterations, morse)]
    s, h = s_start, step
    while direction * (s_end - s) > 1e-12:
        cur = points[-1]
        halvings = 0
        while True:
            h_eff = min(h, abs(s_end - s))
            s_new = s + direction * h_eff
            # snap to the nominal lattice to keep centered differences symmetric
            if abs(s_new - round(s_new / step) * step) < 1e-9:
                s_new = round(s_new / step) * step
            pred = cur.Q.grid.from_coeffs(cur.Q.Q.coeffs + (s_new - s) * cur.dQds.coeffs)
            try:
                gs_new, it = _correct(pred, params.at(s_new), tol)
                break
            except (FraclapError, ValueError):
                halvings += 1
                h *= 0.5
                if halvings > max_halvings or h < 1e-3:
                    raise BranchStallError(f"branch stalled after s = {s:.6g}", last_s=s) from None
        points.append(_make_point(gs_new, it, morse))
        s = s_new
        h = min(step, 2 * h)
    _fill_numeric_derivative(points)
    return Branch(params.N, params.alpha, s_start, s_end, points)


def _fill_numeric_derivative(points: list[BranchPoint], width: int = 5) -> None:
    # fourth-order stencil, centered where the branch allows
    s = np.array([p.s for p in points])
    m = np.array([p.M for p in points])
    n = len(points)
    w = min(width, n)
    for i in range(1, n - 1):
        lo = min(max(i - w // 2, 0), n - w)
        d = s[lo:lo + w] - s[i]
        V = np.vander(d, increasing=True).T
        e1 = np.zeros(w)
        e1[1] = 1.0
        points[i].dMds_numeric = float(np.linalg.solve(V, e1) @ m[lo:lo + w])


def mass_derivative_check(branch: Branch, floor: float = 0.1) -> list[float]:
    """Relative gap between the identity and centered differences at interior points.

    Parameters
    ----------
    branch : Branch
        At least three points.
    floor : float
        Each gap is divided by ``max(|dM/ds|, floor * max_branch |dM/ds|)``, so
        points where ``dM/ds`` crosses zero are measured against the branch scale.

    Returns
    -------
    list of float
        One gap per interior point.
    """
    if len(branch.points) < 3:
        raise ValueError("need at least three branch points")
    scale = floor * max(abs(p.dMds_analytic) for p in branch.points)
    return [abs(p.dMds_analytic - p.dMds_numeric) / max(abs(p.dMds_analytic), scale) for p in branch.points[1:-1]]


@dataclass
class UniquenessReport:
    max_distance: float
    labels: list[str]
    distances: np.ndarray
    rejected: dict[str, str]


def uniqueness_probe(params: ProblemParams, grid: RadialGrid, n_starts: int = 3, endpoint: GroundState | None = None, tol: float = 1e-9, include_flipped: bool = False) -> UniquenessReport:
    """Solve from distinct positive starts and compare in max norm.

    Starts that fail, or converge to a profile that is not positive, are
    reported in ``rejected`` and left out of the comparison.
    """
    if n_starts < 2:
        raise ValueError("need at least two starts")
    w = min(1.5, grid.R / 20.0)
    shapes = [("gaussian", w, 1.0), ("lorentzian", 0.5 * w, 3.0), ("sech", 2.0 * w, 0.5), ("gaussian", 3.0 * w, 2.0), ("lorentzian", 2.0 * w, 1.0)]
    if n_starts > len(shapes):
        raise ValueError(f"at most {len(shapes)} starts are available")
    starts = {f"{k}(w={wd:g},h={ht:g})": initial_profile(grid, k, wd, ht) for k, wd, ht in shapes[:n_starts]}
    if include_flipped:
        starts["flipped-gaussian"] = -initial_profile(grid, "gaussian", w, 1.0)
    sols: dict[str, np.ndarray] = {}
    rejected: dict[str, str] = {}
    for label, init in starts.items():
        try:
            gs = solve_ground_state(params, grid, init=init, tol=tol)
        except FraclapError as exc:
            rejected[label] = f"failed: {exc}"
            continue
        if not gs.converged:
            rejected[label] = f"residual {gs.residual:.2e}"
        elif np.min(gs.Q.values[: grid.M // 4]) < 0:
            rejected[label] = "not positive"
        else:
            sols[label] = gs.Q.values
    if endpoint is not None:
        sols["branch-endpoint"] = endpoint.Q.values
    labels = list(sols)
    D = np.zeros((len(labels), len(labels)))
    for i, a in enumerate(labels):
        for j, b in enumerate(labels[:i]):
            D[i, j] = D[j, i] = float(np.max(np.abs(sols[a] - sols[b])))
    return UniquenessReport(float(D.max()) if labels else math.inf, labels, D, rejected)
