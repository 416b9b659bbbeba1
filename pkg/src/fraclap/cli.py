"""Command-line entry point: ``fraclap <command> [options]``.

Every command writes ``summary.json`` and one or more CSV files into the
output directory and exits with status 1 iff an enabled check fails.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ground_state import alpha_star

COMMANDS = ("solve", "spectrum", "continue", "extend", "resolvent", "homotopy", "verify-all")

# defaults applied after the config file and the explicit flags
DEFAULTS = {
    "N": 1,
    "s": 0.5,
    "alpha": 1.0,
    "R": None,
    "M": None,
    "tol": 1e-9,
    "output": None,
    "jobs": 1,
    "seed": 0,
    "s_start": 1.0,
    "step": 0.01,
    "lam": 1.0,
    "g": None,
    "only": None,
}


@dataclass
class RunConfig:
    command: str
    N: int
    s: float
    alpha: float
    R: float | None
    M: int | None
    tol: float
    output: Path
    jobs: int
    seed: int
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("command", "N", "s", "alpha", "R", "M", "tol", "jobs", "seed")}
        d.update(self.extra)
        return d


class ConfigError(ValueError):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, help="spatial dimension")
    common.add_argument("--s", type=float, help="fractional order in (0, 1]")
    common.add_argument("--alpha", type=float, help="power of the nonlinearity")
    common.add_argument("--R", type=float, help="ball radius")
    common.add_argument("--M", type=int, help="number of radial modes")
    common.add_argument("--tol", type=float, help="residual tolerance")
    common.add_argument("--output", type=str, help="output directory (default $FRACLAP_OUTPUT or ./fraclap-out)")
    common.add_argument("--config", type=str, help="JSON file with option values; flags win")
    common.add_argument("--jobs", type=int, help="worker processes for independent sub-runs")
    common.add_argument("--seed", type=int, help="seed for randomized data")

    p = argparse.ArgumentParser(prog="fraclap", description="Radial fractional Laplacian verification runs.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="ground state and Pohozaev residuals")
    sub.add_parser("spectrum", parents=[common], help="sector spectra of L_+")
    c = sub.add_parser("continue", parents=[common], help="branch in s from --s-start to --s")
    c.add_argument("--s-start", dest="s_start", type=float)
    c.add_argument("--step", type=float)
    sub.add_parser("extend", parents=[common], help="extension, Neumann trace and trace energy")
    r = sub.add_parser("resolvent", parents=[common], help="kernel of ((-Delta)^s + lam)^-1")
    r.add_argument("--lam", type=float)
    h = sub.add_parser("homotopy", parents=[common], help="three-leg homotopy from a Gaussian well")
    h.add_argument("--g", type=float, help="well depth")
    v = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    v.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    return p


def parse_args(argv: list[str] | None = None) -> RunConfig:
    """Parse ``argv`` into a validated :class:`RunConfig`.

    Values come from the flags, then the JSON config file, then the defaults.

    Raises
    ------
    ConfigError
        For an unreadable config or an inadmissible ``(N, s, alpha)``.
    """
    ns = _parser().parse_args(argv)
    values = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    file_values: dict = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {}
    for k in DEFAULTS:
        if values.get(k) is not None:
            merged[k] = values[k]
        elif file_values.get(k) is not None:
            merged[k] = file_values[k]
        else:
            merged[k] = DEFAULTS[k]
    out = merged["output"] or os.environ.get("FRACLAP_OUTPUT") or "fraclap-out"
    cfg = RunConfig(
        command=ns.command,
        N=int(merged["N"]),
        s=float(merged["s"]),
        alpha=float(merged["alpha"]),
        R=None if merged["R"] is None else float(merged["R"]),
        M=None if merged["M"] is None else int(merged["M"]),
        tol=float(merged["tol"]),
        output=Path(out),
        jobs=max(1, int(merged["jobs"])),
        seed=int(merged["seed"]),
        extra={k: merged[k] for k in ("s_start", "step", "lam", "g", "only") if merged[k] is not None},
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.N < 1:
        raise ConfigError("N must be a positive integer")
    if not 0.0 < cfg.s <= 1.0:
        raise ConfigError(f"s must lie in (0, 1], got {cfg.s}")
    if cfg.command in ("solve", "spectrum", "continue"):
        a_star = alpha_star(cfg.s, cfg.N)
        if not 0.0 < cfg.alpha < a_star:
            raise ConfigError(
                f"alpha = {cfg.alpha} is not admissible: need 0 < alpha < alpha_*(s={cfg.s}, N={cfg.N}) = {a_star:.6g}"
            )
    if cfg.R is not None and cfg.R <= 0:
        raise ConfigError("R must be positive")
    if cfg.M is not None and cfg.M < 8:
        raise ConfigError("M must be at least 8")


# -- output ----------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, Path):
        return str(x)
    return x


def write_csv(path: Path, columns: dict[str, np.ndarray]) -> None:
    """Comma-separated columns in scientific notation with 17 significant digits."""
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    np.savetxt(path, data, delimiter=",", fmt="%.16e", header=",".join(names), comments="")


def emit_results(cfg: RunConfig, summary: dict, tables: dict[str, dict[str, np.ndarray]]) -> Path:
    """Write ``summary.json`` and ``<name>.csv`` for each table."""
    try:
        cfg.output.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {cfg.output} is not writable: {exc}") from None
    for name, cols in tables.items():
        write_csv(cfg.output / f"{name}.csv", cols)
    doc = {"config": cfg.as_dict(), **summary}
    path = cfg.output / "summary.json"
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


# -- commands --------------------------------------------------------------

def _grid(cfg: RunConfig, default_R: float = 100.0, default_M: int = 1024, ell: int = 0):
    from .spectral import SectorIndex, make_grid

    return make_grid(SectorIndex(cfg.N, ell), cfg.R or default_R, cfg.M or default_M)


def _solve(cfg: RunConfig):
    from .ground_state import ProblemParams, solve_ground_state

    return solve_ground_state(ProblemParams(cfg.N, cfg.s, cfg.alpha), _grid(cfg), tol=cfg.tol)


def cmd_solve(cfg: RunConfig):
    gs = _solve(cfg)
    checks = {
        "converged": gs.converged,
        "pohozaev1": gs.pohozaev1_residual < 1e-6,
        "pohozaev2": gs.pohozaev2_residual < 1e-6,
    }
    summary = {"ground_state": gs.summary(), "checks": checks}
    return summary, {"Q_profile": {"r": gs.grid.nodes, "Q": gs.Q.values}}


def cmd_spectrum(cfg: RunConfig):
    from .linearized import nondegeneracy_report

    gs = _solve(cfg)
    rep = nondegeneracy_report(gs)
    ell, idx, vals = [], [], []
    for l, entry in rep["sectors"].items():
        for i, E in enumerate(entry["lowest"]):
            ell.append(l)
            idx.append(i)
            vals.append(E)
    checks = {"converged": gs.converged, "nondegenerate": rep["pass"]}
    return {"ground_state": gs.summary(), "sectors": rep["sectors"], "checks": checks}, {
        "spectrum": {"ell": np.array(ell), "index": np.array(idx), "eigenvalue": np.array(vals)}
    }


def cmd_continue(cfg: RunConfig):
    from .continuation import continue_branch, mass_derivative_check
    from .ground_state import ProblemParams

    s_start = float(cfg.extra.get("s_start", 1.0))
    branch = continue_branch(ProblemParams(cfg.N, s_start, cfg.alpha), _grid(cfg), s_start, cfg.s,
                             float(cfg.extra.get("step", 0.01)), tol=cfg.tol)
    rows = [p.row() for p in branch.points]
    checks = {"morse_index_one": all(p.morse_index == 1 for p in branch.points)}
    if len(branch.points) >= 3:
        checks["mass_identity"] = max(mass_derivative_check(branch)) < 1e-3
    cols = ("s", "M", "T", "V", "dMds_analytic", "dMds_numeric", "morse_index")
    return {"points": rows, "band_ratios": branch.band_ratios(), "checks": checks}, {
        "branch": {c: np.array([r[c] for r in rows]) for c in cols},
        "endpoint_profile": {"r": branch.endpoint.grid.nodes, "Q": branch.endpoint.Q.values},
    }


def cmd_extend(cfg: RunConfig):
    from .extension import d_s, dirichlet_neumann_check, trace_inequality_check

    grid = _grid(cfg, 20.0, 256)
    f = grid.sample(lambda r: np.exp(-(r**2)))
    dn = dirichlet_neumann_check(f, cfg.s)
    tr = trace_inequality_check(f, cfg.s)
    checks = {"neumann_trace": dn.residual < 1e-6, "trace_identity": abs(tr.ratio - 1) < 1e-4}
    summary = {"d_s": d_s(cfg.s), "neumann_residual": dn.residual, "trace_ratio": tr.ratio, "checks": checks}
    return summary, {"neumann_trace": {"r": grid.nodes, "f": f.values, "neumann_limit": dn.limit, "frac_lap": dn.reference}}


def cmd_resolvent(cfg: RunConfig):
    from .resolvent import kernel_tail_fit, resolvent_kernel

    lam = float(cfg.extra.get("lam", 1.0))
    prof = resolvent_kernel(cfg.s, lam, cfg.N)
    C, res = kernel_tail_fit(prof)
    checks = {
        "l1_norm": abs(prof.l1_norm * lam - 1) < 1e-4,
        "positive": prof.is_positive(),
        "decreasing": prof.is_decreasing(),
    }
    summary = {"l1_norm": prof.l1_norm, "tail_constant": C, "tail_residual": res, "checks": checks}
    return summary, {"resolvent": {"r": prof.radii, "G": prof.values}}


def cmd_homotopy(cfg: RunConfig):
    from .schrodinger import PotentialSpec, homotopy_run, schrodinger_grid

    g = cfg.extra.get("g") or {1: 11.0, 2: 16.0, 3: 22.0}.get(cfg.N, 22.0)
    grid = schrodinger_grid(cfg.N, cfg.R or 60.0, cfg.M or 512)
    V = PotentialSpec.gaussian(float(g))
    states = homotopy_run(cfg.s, V, V, grid)
    checks = {
        "two_negative": all(st.E1 < st.E2 < 0 for st in states),
        "simple": min(st.gap for st in states) > 1e-6,
        "one_sign_change": all(st.sign_changes == 1 for st in states),
    }
    table = {
        "kappa": np.array([st.kappa for st in states]),
        "leg": np.array([st.leg for st in states]),
        "s": np.array([st.s_kappa for st in states]),
        "E1": np.array([st.E1 for st in states]),
        "E2": np.array([st.E2 for st in states]),
        "sign_changes": np.array([st.sign_changes for st in states]),
    }
    return {"g": g, "knots": len(states), "checks": checks}, {"homotopy": table}


def cmd_verify_all(cfg: RunConfig):
    from .acceptance import run_all

    results = run_all(cfg.extra.get("only"), jobs=cfg.jobs, seed=cfg.seed, echo=print)
    crit = {str(r.number): {"title": r.title, "pass": r.passed, "details": _strip_seconds(r.details)} for r in results}
    checks = {f"criterion_{r.number}": r.passed for r in results}
    timings = {str(r.number): r.seconds for r in results}
    return {"criteria": crit, "checks": checks, "_timings": timings}, {}


def _strip_seconds(d):
    # wall-clock times go to timings.json so that summary.json is reproducible
    if isinstance(d, dict):
        return {k: _strip_seconds(v) for k, v in d.items() if "seconds" not in k}
    if isinstance(d, list):
        return [_strip_seconds(v) for v in d]
    return d


HANDLERS = {
    "solve": cmd_solve,
    "spectrum": cmd_spectrum,
    "continue": cmd_continue,
    "extend": cmd_extend,
    "resolvent": cmd_resolvent,
    "homotopy": cmd_homotopy,
    "verify-all": cmd_verify_all,
}


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except ConfigError as exc:
        print(f"fraclap: error: {exc}", file=sys.stderr)
        return 2
    try:
        summary, tables = HANDLERS[cfg.command](cfg)
        failed_error = None
    except Exception as exc:
        summary, tables = {"checks": {"completed": False}}, {}
        failed_error = f"{type(exc).__name__}: {exc}"
        summary["error"] = failed_error
    timings = summary.pop("_timings", None)
    ok = all(summary.get("checks", {}).values())
    summary["pass"] = ok
    try:
        path = emit_results(cfg, summary, tables)
    except ConfigError as exc:
        print(f"fraclap: error: {exc}", file=sys.stderr)
        return 2
    if timings is not None:
        (cfg.output / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    if failed_error:
        print(f"fraclap: {cfg.command} failed: {failed_error}", file=sys.stderr)
    for name, val in summary.get("checks", {}).items():
        print(f"{'PASS' if val else 'FAIL'} {name}")
    print(f"wrote {path}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
