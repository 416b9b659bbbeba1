"""Linearization around a ground state, sector by sector.

``L_{+,ell} = (-Delta_ell)^s + 1 - (alpha+1) Q^alpha`` is assembled as a dense
symmetric matrix in the Fourier-Bessel coefficients of sector ``ell``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import LinearOperator, gmres

from . import kernels
from .errors import NewtonSingularError
from .spectral import RadialField, RadialGrid, SectorIndex, make_grid

if TYPE_CHECKING:
    from .ground_state import GroundState

__all__ = [
    "SectorSpectrum",
    "multiplication_matrix",
    "schrodinger_matrix",
    "assemble_lplus",
    "sector_spectrum",
    "sign_changes",
    "nondegeneracy_report",
    "free_gap",
    "lplus_solve",
    "lplus_apply",
]

#: largest basis size solved by dense LU; Krylov beyond
DENSE_SOLVE_MAX = 1536


def multiplication_matrix(grid: RadialGrid, potential: np.ndarray) -> np.ndarray:
    """Coefficient-space matrix of multiplication by ``potential`` (node samples).

    Built as analysis * diag(V) * synthesis and symmetrized.
    """
    A = grid.analysis @ (potential[:, None] * grid.synthesis)
    return 0.5 * (A + A.T)


def schrodinger_matrix(grid: RadialGrid, s: float, potential: np.ndarray, shift: float = 0.0) -> np.ndarray:
    """Dense symmetric matrix of ``(-Delta_ell)^s + shift + V``."""
    A = multiplication_matrix(grid, potential)
    A[np.diag_indices_from(A)] += grid.eigenvalues**s + shift
    return A


def lplus_matrix(grid: RadialGrid, Q_nodes: np.ndarray, s: float, alpha: float) -> np.ndarray:
    return schrodinger_matrix(grid, s, -(alpha + 1.0) * np.abs(Q_nodes) ** alpha, shift=1.0)


def lplus_apply(grid: RadialGrid, Q_nodes: np.ndarray, s: float, alpha: float, coeffs: np.ndarray) -> np.ndarray:
    """Matrix-free radial L_+ acting on coefficients."""
    pot = (alpha + 1.0) * np.abs(Q_nodes) ** alpha
    return (grid.eigenvalues**s + 1.0) * coeffs - grid.forward(pot * grid.inverse(coeffs))


def lplus_solve(grid: RadialGrid, Q_nodes: np.ndarray, s: float, alpha: float, rhs: np.ndarray, pivot_tol: float = 1e-13) -> np.ndarray:
    """Solve the radial ``L_+ x = rhs`` in coefficient space.

    Dense LU up to ``DENSE_SOLVE_MAX`` modes, GMRES preconditioned by the
    diagonal symbol beyond.

    Raises
    ------
    NewtonSingularError
        If the LU pivots or the Krylov iteration signal a singular operator.
    """
    if grid.M <= DENSE_SOLVE_MAX:
        J = lplus_matrix(grid, Q_nodes, s, alpha)
        try:
            lu = linalg.lu_factor(J, check_finite=False)
        except (linalg.LinAlgError, ValueError) as exc:
            raise NewtonSingularError(str(exc)) from exc
        piv = np.abs(np.diag(lu[0]))
        if piv.min() < pivot_tol * piv.max():
            raise NewtonSingularError(f"radial L_+ numerically singular (pivot ratio {piv.min() / piv.max():.2e})")
        return linalg.lu_solve(lu, rhs, check_finite=False)
    symbol = grid.eigenvalues**s + 1.0
    n = grid.M
    op = LinearOperator((n, n), matvec=lambda x: lplus_apply(grid, Q_nodes, s, alpha, x), dtype=float)
    pre = LinearOperator((n, n), matvec=lambda x: x / symbol, dtype=float)
    x, info = gmres(op, rhs, M=pre, rtol=1e-13, atol=0.0, restart=200, maxiter=20)
    if info != 0:
        raise NewtonSingularError(f"GMRES on radial L_+ did not converge (info {info})")
    return x


def sector_grid(gs: "GroundState", ell: int) -> RadialGrid:
    g = gs.Q.grid
    return make_grid(SectorIndex(g.N, ell), g.R, g.M)


def assemble_lplus(gs: "GroundState", sector: SectorIndex | int = 0) -> tuple[np.ndarray, RadialGrid]:
    """Matrix of L_{+,ell} and the sector grid it lives on.

    The potential ``Q**alpha`` is evaluated on the sector's own nodes from
    the spectral interpolant of ``Q``.
    """
    ell = sector if isinstance(sector, int) else sector.ell
    if not isinstance(sector, int) and sector.N != gs.params.N:
        raise ValueError("sector dimension does not match the ground state")
    grid = sector_grid(gs, ell)
    q = gs.Q.values if ell == 0 else gs.Q(grid.nodes)
    return lplus_matrix(grid, q, gs.params.s, gs.params.alpha), grid


def free_gap(grid: RadialGrid, s: float) -> float:
    """Distance from zero to the spectrum of the free operator ``(-Delta)^s + 1``."""
    return float(grid.eigenvalues[0] ** s + 1.0)


@dataclass
class SectorSpectrum:
    sector: SectorIndex
    eigenvalues: np.ndarray
    eigenfields: list[RadialField]
    negative_count: int
    near_zero: np.ndarray
    grid: RadialGrid = field(repr=False)

    def vector(self, i: int) -> np.ndarray:
        return self.eigenfields[i].coeffs


def sector_spectrum(matrix: np.ndarray, grid: RadialGrid, k: int = 6, zero_tol: float | None = None) -> SectorSpectrum:
    """Lowest ``k`` eigenpairs of a symmetric sector matrix.

    ``negative_count`` covers the full spectrum: the window is widened until
    it contains a nonnegative eigenvalue.
    """
    if not np.allclose(matrix, matrix.T, atol=1e-10 * max(1.0, np.abs(matrix).max())):
        raise ValueError("sector matrix is not symmetric")
    n = matrix.shape[0]
    k = min(k, n)
    while True:
        try:
            vals, vecs = linalg.eigh(matrix, subset_by_index=[0, k - 1], driver="evr")
        except linalg.LinAlgError as exc:
            cond = np.linalg.cond(matrix)
            raise linalg.LinAlgError(f"eigensolver failed (condition number {cond:.3e})") from exc
        if vals[-1] > 0 or k == n:
            break
        # every computed eigenvalue is negative: widen until the count is complete
        k = min(2 * k, n)
    negative = int(np.sum(vals < 0))
    if zero_tol is None:
        zero_tol = 1e-6
    fields = []
    for v in vecs.T:
        f = grid.from_coeffs(v)
        # fix the sign: positive at the first node where the field is visible
        idx = np.argmax(np.abs(f.values) > 1e-3 * np.abs(f.values).max())
        fields.append(f if f.values[idx] >= 0 else -f)
    return SectorSpectrum(
        sector=grid.sector,
        eigenvalues=vals,
        eigenfields=fields,
        negative_count=negative,
        near_zero=vals[np.abs(vals) < zero_tol],
        grid=grid,
    )


def sign_changes(f: RadialField | np.ndarray, threshold_rel: float = 1e-8) -> int:
    """Strict sign alternations among samples with |f| > threshold_rel * max|f|."""
    values = f.values if isinstance(f, RadialField) else np.asarray(f, dtype=float)
    thr = threshold_rel * float(np.max(np.abs(values))) if values.size else 0.0
    return int(kernels.sign_changes(np.ascontiguousarray(values, dtype=float), thr))


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    return abs(float(np.dot(a, b))) / float(np.linalg.norm(a) * np.linalg.norm(b))


def nondegeneracy_report(gs: "GroundState", ell_max: int = 3, k: int = 4, min_zero_gap: float = 1e-4) -> dict:
    """Per-sector spectral summary of L_+ and the overall verdict.

    PASS requires Morse index one with ``|E| > min_zero_gap`` in the radial
    sector, a single zero mode in ell = 1 collinear with Q', and strictly
    positive sectors ell >= 2.
    """
    N = gs.params.N
    top = 1 if N == 1 else ell_max
    sectors = {}
    ok = True
    for ell in range(top + 1):
        A, grid = assemble_lplus(gs, ell)
        zero_tol = 1e-5 * free_gap(grid, gs.params.s)
        spec = sector_spectrum(A, grid, k=k, zero_tol=zero_tol)
        entry = {
            "ell": ell,
            "lowest": [float(x) for x in spec.eigenvalues],
            "negative_count": spec.negative_count,
            "zero_gap": float(np.min(np.abs(spec.eigenvalues))),
            "zero_tol": zero_tol,
        }
        if ell == 0:
            entry["pass"] = spec.negative_count == 1 and entry["zero_gap"] > min_zero_gap
        elif ell == 1:
            dq = grid.field(gs.Q.derivative(grid.nodes))
            sim = cosine_similarity(spec.vector(0), dq.coeffs)
            entry["cosine_with_dQ"] = sim
            entry["pass"] = (
                spec.negative_count == 0
                and abs(spec.eigenvalues[0]) < zero_tol
                and spec.eigenvalues[1] > zero_tol
                and sim > 1 - 1e-6
            )
        else:
            entry["pass"] = bool(spec.eigenvalues[0] > zero_tol)
        ok = ok and entry["pass"]
        sectors[ell] = entry
    mins = [sectors[l]["lowest"][0] for l in sorted(sectors)]
    ordered = all(b > a for a, b in zip(mins, mins[1:]))
    return {"sectors": sectors, "ordered": ordered, "pass": ok and ordered}
