"""Radial spectra of (-Delta)^s + V, the two-bound-state coupling and the
three-leg homotopy to the classical operator -Delta + W.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg

from .errors import BracketError, ContinuityBreakError, NoPlateauError
from .linearized import SectorSpectrum, schrodinger_matrix, sector_spectrum, sign_changes
from .resolvent import fractional_kernel_constant
from .spectral import RadialField, RadialGrid, SectorIndex, make_grid, sphere_area

__all__ = [
    "PotentialSpec",
    "HomotopyState",
    "radial_spectrum",
    "simplicity_gap",
    "origin_ratio",
    "trial_matrices",
    "trial_coupling_bound",
    "find_two_state_coupling",
    "homotopy_operator",
    "homotopy_run",
    "jump_order",
    "eigen_tail_fit",
    "predicted_tail_coefficient",
    "kato_form_check",
    "schrodinger_grid",
]


def schrodinger_grid(N: int, R: float = 60.0, M: int = 512) -> RadialGrid:
    """Radial grid used for the Gaussian-well operators."""
    return make_grid(SectorIndex(N, 0), R, M)


@dataclass(frozen=True)
class PotentialSpec:
    """A radial potential: ``gaussian`` (``-g exp(-r^2)``), ``sampled`` or ``shifted``.

    ``shifted`` subtracts ``E`` from a base potential, which folds an
    eigenvalue into the potential.
    """

    kind: str
    g: float = 0.0
    samples: RadialField | None = None
    base: "PotentialSpec | None" = None
    E: float = 0.0

    def __post_init__(self):
        if self.kind == "gaussian" and self.g < 0:
            raise ValueError("gaussian coupling must be non-negative")
        if self.kind == "sampled" and self.samples is None:
            raise ValueError("sampled potential needs samples")
        if self.kind == "shifted" and self.base is None:
            raise ValueError("shifted potential needs a base")
        if self.kind not in ("gaussian", "sampled", "shifted"):
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @classmethod
    def gaussian(cls, g: float) -> "PotentialSpec":
        return cls("gaussian", g=float(g))

    @classmethod
    def sampled(cls, f: RadialField) -> "PotentialSpec":
        return cls("sampled", samples=f)

    def shifted(self, E: float) -> "PotentialSpec":
        return PotentialSpec("shifted", base=self, E=float(E))

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            return -self.g * np.exp(-(r**2))
        if self.kind == "sampled":
            return self.samples(r)
        return self.base(r) - self.E

    def on(self, grid: RadialGrid) -> RadialField:
        return grid.field(self(grid.nodes))

    def monotone_nondecreasing(self, grid: RadialGrid, tol: float = 1e-12) -> bool:
        v = self(np.concatenate([[0.0], grid.nodes]))
        return bool(np.all(np.diff(v) >= -tol * max(1.0, np.abs(v).max())))


def radial_spectrum(s: float, V: PotentialSpec | np.ndarray, grid: RadialGrid, k: int = 6) -> SectorSpectrum:
    """Lowest ``k`` eigenpairs of ``(-Delta)^s + V`` in the grid's sector."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"s must lie in (0, 1], got {s}")
    pot = V(grid.nodes) if isinstance(V, PotentialSpec) else np.asarray(V, dtype=float)
    if not np.all(np.isfinite(pot)):
        raise ValueError("potential must be bounded")
    return sector_spectrum(schrodinger_matrix(grid, s, pot), grid, k=k)


def simplicity_gap(spec: SectorSpectrum, threshold: float = 0.0) -> float:
    """Smallest gap between consecutive eigenvalues below ``threshold``."""
    vals = spec.eigenvalues[spec.eigenvalues < threshold]
    return float(np.min(np.diff(vals))) if vals.size > 1 else math.inf


def origin_ratio(psi: RadialField) -> float:
    """``|psi(0)| / max |psi|``."""
    v0 = float(psi.grid.basis(np.array([0.0]))[0] @ psi.coeffs)
    return abs(v0) / max(abs(v0), float(np.max(np.abs(psi.values))))


# --------------------------------------------------------------------------
# two-state coupling


def _moment(p: float, c: float) -> float:
    """int_0^inf r^p exp(-c r^2) dr."""
    return math.gamma((p + 1) / 2) / (2 * c ** ((p + 1) / 2))


def trial_matrices(s: float, N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Overlap, kinetic and Gaussian-potential matrices of the two trial states.

    ``psi1 = pi^{-N/4} exp(-r^2/2)`` and ``psi2 = n2 (r^2 - N/2) exp(-r^2/2)``
    are Hermite functions, so their Fourier transforms are ``psi1`` and
    ``-psi2``; the kinetic entries are moments of ``|x|^{2s}``.
    """
    area = sphere_area(N)
    n1 = math.pi ** (-N / 4)
    n2 = (N * math.pi ** (N / 2) / 2) ** -0.5

    def integral(poly: list[float], extra: float, c: float) -> float:
        # int |S| r^{N-1} r^extra (sum_j poly[j] r^{2j}) exp(-c r^2) dr
        return area * sum(a * _moment(N - 1 + extra + 2 * j, c) for j, a in enumerate(poly) if a)

    h = N / 2
    p11 = [n1 * n1]
    p12 = [-h * n1 * n2, n1 * n2]
    p22 = [h * h * n2 * n2, -2 * h * n2 * n2, n2 * n2]
    mats = []
    for extra, c, sign12 in ((0.0, 1.0, 1.0), (2 * s, 1.0, -1.0), (0.0, 2.0, 1.0)):
        a11 = integral(p11, extra, c)
        a12 = sign12 * integral(p12, extra, c)
        a22 = integral(p22, extra, c)
        mats.append(np.array([[a11, a12], [a12, a22]]))
    return mats[0], mats[1], mats[2]


def trial_coupling_bound(s: float, N: int) -> float:
    """Smallest ``g`` with ``T - g Vg`` negative definite on the trial span.

    By min-max, ``-g exp(-r^2)`` then has two negative radial eigenvalues, so
    the true threshold coupling is at most this value.
    """
    _, T, Vg = trial_matrices(s, N)
    return float(linalg.eigh(T, Vg, eigvals_only=True)[-1])


def _second_eigenvalue(s: float, g: float, grid: RadialGrid) -> float:
    return float(radial_spectrum(s, PotentialSpec.gaussian(g), grid, k=2).eigenvalues[1])


def find_two_state_coupling(s: float, N: int, grid: RadialGrid | None = None, level: float = -1e-6, rtol: float = 1e-3, g_max: float = 1e3) -> tuple[float, float]:
    """Smallest ``g`` giving a second radial eigenvalue below ``level``.

    Returns ``(g_star, trial_bound)``; bisection stops at relative width
    ``rtol``.

    Raises
    ------
    BracketError
        If ``g_max`` still yields a single bound state.
    """
    grid = schrodinger_grid(N) if grid is None else grid
    lo, hi = 0.0, 1.0
    while _second_eigenvalue(s, hi, grid) >= level:
        lo, hi = hi, 2 * hi
        if hi > g_max:
            raise BracketError(f"g = {g_max} gives fewer than two bound states at s = {s}, N = {N}")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _second_eigenvalue(s, mid, grid) < level:
            hi = mid
        else:
            lo = mid
    return hi, trial_coupling_bound(s, N)


# --------------------------------------------------------------------------
# homotopy


@dataclass
class HomotopyState:
    kappa: float
    leg: int
    s_kappa: float
    E1: float
    E2: float
    psi2: RadialField = field(repr=False)
    psi1: RadialField = field(repr=False)
    sign_changes: int = 0
    sign_changes_psi1: int = 0
    gap: float = math.inf


def homotopy_operator(kappa: float, s0: float, V: PotentialSpec, W: PotentialSpec) -> tuple[int, float, Callable[[np.ndarray], np.ndarray]]:
    """Leg, order and potential of the three-leg family at ``kappa``.

    Leg 1 switches on ``W``, leg 2 switches off ``V``, leg 3 raises the order
    from ``s0`` to 1.
    """
    if not 0.0 <= kappa <= 1.0:
        raise ValueError("kappa must lie in [0, 1]")
    if kappa <= 1 / 3:
        tau = 3 * kappa
        return 1, s0, lambda r: V(r) + tau * W(r)
    if kappa <= 2 / 3:
        tau = 3 * kappa - 1
        return 2, s0, lambda r: (1 - tau) * V(r) + W(r)
    tau = 3 * kappa - 2
    return 3, (1 - tau) * s0 + tau, W


def _state(kappa: float, s0: float, V: PotentialSpec, W: PotentialSpec, grid: RadialGrid) -> HomotopyState:
    leg, sk, pot = homotopy_operator(kappa, s0, V, W)
    spec = radial_spectrum(sk, pot(grid.nodes), grid, k=3)
    e = spec.eigenvalues
    return HomotopyState(
        kappa=kappa,
        leg=leg,
        s_kappa=sk,
        E1=float(e[0]),
        E2=float(e[1]),
        psi1=spec.eigenfields[0],
        psi2=spec.eigenfields[1],
        sign_changes=sign_changes(spec.eigenfields[1]),
        sign_changes_psi1=sign_changes(spec.eigenfields[0]),
        gap=float(e[1] - e[0]),
    )


def _overlap(a: RadialField, b: RadialField) -> float:
    return float(np.dot(a.coeffs, b.coeffs))


def homotopy_run(s0: float, V: PotentialSpec, W: PotentialSpec, grid: RadialGrid, steps_per_leg: int = 32, max_refine: int = 3, min_overlap: float = 0.9) -> list[HomotopyState]:
    """States at ``3 * steps_per_leg + 1`` uniform knots in ``kappa``.

    The sign of ``psi2`` follows continuity: each state is flipped to have a
    positive overlap with its predecessor.  A step whose overlap falls below
    ``min_overlap`` is bisected up to ``max_refine`` times; intermediate
    states serve only to carry the sign and are not returned.

    Raises
    ------
    ContinuityBreakError
        If refinement does not restore the overlap.
    """
    knots = np.linspace(0.0, 1.0, 3 * steps_per_leg + 1)
    prev = _state(0.0, s0, V, W, grid)
    states = [prev]
    for k1 in knots[1:]:
        cur = _advance(prev, k1, s0, V, W, grid, max_refine, min_overlap)
        states.append(cur)
        prev = cur
    return states


def _align(prev: HomotopyState, cur: HomotopyState) -> float:
    ov = _overlap(prev.psi2, cur.psi2)
    if ov < 0:
        cur.psi2 = -cur.psi2
        ov = -ov
    if _overlap(prev.psi1, cur.psi1) < 0:
        cur.psi1 = -cur.psi1
    return ov


def _advance(prev: HomotopyState, k1: float, s0, V, W, grid, depth: int, min_overlap: float) -> HomotopyState:
    cur = _state(k1, s0, V, W, grid)
    if _align(prev, cur) >= min_overlap:
        return cur
    if depth == 0:
        raise ContinuityBreakError(f"eigenfunction overlap below {min_overlap} between kappa {prev.kappa:.6g} and {k1:.6g}")
    mid = _advance(prev, 0.5 * (prev.kappa + k1), s0, V, W, grid, depth - 1, min_overlap)
    return _advance(mid, k1, s0, V, W, grid, depth - 1, min_overlap)


def max_jump(states: list[HomotopyState]) -> float:
    e = np.array([st.E2 for st in states])
    return float(np.max(np.abs(np.diff(e))))


def jump_order(s0: float, V: PotentialSpec, W: PotentialSpec, grid: RadialGrid, steps=(16, 32, 64)) -> tuple[list[float], list[float]]:
    """Largest ``E2`` jump per knot count and the observed orders between levels."""
    jumps = [max_jump(homotopy_run(s0, V, W, grid, steps_per_leg=n)) for n in steps]
    orders = [math.log(j0 / j1) / math.log(n1 / n0) for j0, j1, n0, n1 in zip(jumps, jumps[1:], steps, steps[1:])]
    return jumps, orders


# --------------------------------------------------------------------------
# decay and Kato


def predicted_tail_coefficient(psi: RadialField, s: float, E: float, V: PotentialSpec | np.ndarray) -> float:
    """Coefficient of ``r^{-N-2s}`` in ``psi`` from the resolvent tail.

    ``psi = -((-Delta)^s - E)^{-1} (V psi)``, so the coefficient is
    ``-c_{N,s} (-E)^{-2} int V psi``.
    """
    g = psi.grid
    pot = V(g.nodes) if isinstance(V, PotentialSpec) else np.asarray(V, dtype=float)
    return -fractional_kernel_constant(g.N, s) / E**2 * g.integrate(pot * psi.values)


def eigen_tail_fit(psi: RadialField, s: float, E: float, window=None, max_residual: float = 0.1) -> tuple[float, float]:
    """Tail of an eigenfunction with ``E < 0``.

    For ``s < 1`` the plateau of ``r^{N+2s} psi`` is fitted on ``[0.1R, 0.4R]``
    with corrections ``r^{-2s}`` and ``(r/R)^2`` for the truncated ball and the
    coefficient is returned.  For ``s = 1`` a log-linear fit of
    ``r^{(N-1)/2} psi`` on ``[0.4R, 0.7R]`` returns the slope; the window
    shrinks proportionally when ``psi`` falls below ``1e-10`` of its peak.  The second
    value is the relative residual of the fit.
    """
    if E >= 0:
        raise ValueError("tail fits need a bound state, E < 0")
    g = psi.grid
    N = g.N
    r = g.nodes
    if s < 1.0:
        w = (0.1, 0.4) if window is None else window
        sel = (r >= w[0] * g.R) & (r <= w[1] * g.R)
        rs = r[sel]
        y = rs ** (N + 2 * s) * psi.values[sel]
        X = np.stack([np.ones_like(rs), rs ** (-2 * s), (rs / g.R) ** 2], axis=1)
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        C = float(coef[0])
        yc = y - X[:, 1:] @ coef[1:]
        resid = float((yc.max() - yc.min()) / abs(C)) if C != 0 else math.inf
        if not resid <= max_residual:
            raise NoPlateauError(f"no plateau of r^(N+2s) psi: relative variation {resid:.3g}", residual=resid)
        return C, resid
    w = (0.4, 0.7) if window is None else window
    lo, hi = w[0] * g.R, w[1] * g.R
    # stop where the profile sinks into round-off
    small = np.flatnonzero(np.abs(psi.values) < 1e-10 * np.abs(psi.values).max())
    if small.size and r[small[0]] < hi:
        hi = r[small[0]]
        lo = min(lo, hi * w[0] / w[1])
    sel = (r >= lo) & (r <= hi)
    y = r[sel] ** ((N - 1) / 2) * psi.values[sel]
    if np.any(y == 0) or np.any(np.sign(y) != np.sign(y[0])):
        raise NoPlateauError("bad exponential fit: tail changes sign", residual=math.inf)
    ly = np.log(np.abs(y))
    slope, icpt = np.polyfit(r[sel], ly, 1)
    resid = float(np.max(np.abs(ly - (slope * r[sel] + icpt))) / max(1.0, abs(ly).max()))
    expected = -math.sqrt(-E)
    if not resid <= max_residual:
        raise NoPlateauError(f"bad exponential fit: residual {resid:.3g}", residual=resid)
    return float(slope), abs(slope / expected - 1.0)


def kato_form_check(f: RadialField, s: float) -> tuple[float, float]:
    """``(|f|, (-Delta)^s |f|)`` and ``(f, (-Delta)^s f)`` in the eigenbasis."""
    g = f.grid
    af = g.field(np.abs(f.values))
    mu = g.eigenvalues**s
    return float(np.dot(mu, af.coeffs**2)), float(np.dot(mu, f.coeffs**2))
