"""Command-line interface: branch sweeps, spectra, brackets, self-checks, figure data.

Exit codes: 0 success, 1 a verification check failed, 2 bad usage,
3 a solver or I/O failure (nothing is written to standard output then).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from landaudisc import fibersolver, kummeroracle, variational
from landaudisc.errors import LandauDiscError
from landaudisc.trialstate import BoundaryCondition
from landaudisc.verify import SUITES, run_suites

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3
FIGURE_M_MAX = 25
FIGURE_N_MAX = 3
KUMMER_TOL = 1e-11
# outside the Kummer range the figure falls back to FEM; at b = 50 the n = 1
# deficit is ~3e-8, below the default mesh's error, hence the finer mesh
FIGURE_FEM_ELEMENTS = 800


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.15g}"


def _bc(text: str) -> BoundaryCondition:
    try:
        return BoundaryCondition.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def worker_count() -> int:
    raw = os.environ.get("LANDAU_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        val = int(raw)
    except ValueError:
        raise UsageError(f"LANDAU_THREADS must be a positive integer, got {raw!r}") from None
    if val < 1:
        raise UsageError(f"LANDAU_THREADS must be a positive integer, got {raw!r}")
    return val


def parallel_map(fn, tasks):
    """Map over ``tasks`` with up to LANDAU_THREADS worker processes; order preserved."""
    tasks = list(tasks)
    workers = min(worker_count(), len(tasks))
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def b_grid(b_min: float, b_max: float, steps: int) -> list[float]:
    if steps < 1:
        raise UsageError("--b-steps must be >= 1")
    if b_max < b_min:
        raise UsageError("--b-max must not be below --b-min")
    if steps == 1:
        return [float(b_min)]
    return [float(b) for b in np.linspace(b_min, b_max, steps)]


# --------------------------------------------------------------------------
# per-point solvers (module level so worker processes can pickle them)
# --------------------------------------------------------------------------


def _fem_levels(m: int, b: float, bc: BoundaryCondition, n_max: int) -> list[float]:
    # a fixed block of at least 3 levels keeps single-branch and spectrum calls bit-identical
    k = max(n_max, FIGURE_N_MAX)
    return [float(v) for v in fibersolver.fem_eigenvalues(m, b, bc, k)[:n_max]]


def _kummer_levels(m: int, b: float, bc: BoundaryCondition, n_max: int) -> list[float]:
    k = max(n_max, FIGURE_N_MAX)
    return kummeroracle.fiber_eigenvalues(m, b, bc, k, tol=KUMMER_TOL)[:n_max]


def _levels(method: str, m: int, b: float, bc: BoundaryCondition, n_max: int) -> list[float]:
    if method == "fem":
        return _fem_levels(m, b, bc, n_max)
    if method == "kummer":
        return _kummer_levels(m, b, bc, n_max)
    if method == "asymptotic":
        return [variational.asymptotic_eig(m, n, b, bc) for n in range(1, n_max + 1)]
    raise ValueError(f"unknown method {method!r}")


def _safe(task):
    fn, args = task
    try:
        return True, fn(*args)
    except (LandauDiscError, ValueError) as exc:
        return False, f"{type(exc).__name__}: {exc}"


def _run_all(fn, arg_list):
    results = parallel_map(_safe, [(fn, a) for a in arg_list])
    for args, (ok, val) in zip(arg_list, results):
        if not ok:
            raise LandauDiscError(f"failure at {args[:-1] if len(args) > 1 else args}: {val}")
    return [val for _, val in results]


def _figure_point(m: int, b: float, bc: BoundaryCondition) -> list[float]:
    lo, hi = kummeroracle.EIGENVALUE_FIELD_RANGE
    if lo <= b <= hi:
        return _kummer_levels(m, b, bc, FIGURE_N_MAX)
    vals = fibersolver.fem_eigenvalues(m, b, bc, FIGURE_N_MAX, n_elements=FIGURE_FEM_ELEMENTS)
    return [float(v) for v in vals]


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_branch(args, out) -> int:
    grid = b_grid(args.b_min, args.b_max, args.b_steps)
    methods = ["asymptotic", "fem", "kummer"] if args.method == "all" else [args.method]
    jobs = [(meth, args.m, b, args.bc, args.n) for meth in methods for b in grid]
    levels = _run_all(_levels, jobs)
    rows = sorted(
        (args.m, args.n, b, meth, lv[args.n - 1])
        for (meth, _, b, _, _), lv in zip(jobs, levels)
    )
    lines = ["m,n,b,method,lambda"]
    for m, n, b, meth, lam in rows:
        if not math.isfinite(lam):
            raise LandauDiscError(f"non-finite eigenvalue for m={m}, n={n}, b={b}, method={meth}")
        lines.append(f"{m},{n},{fmt(b)},{meth},{fmt(lam)}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def spectrum_rows(b: float, bc: BoundaryCondition, m_max: int, n_max: int,
                  lambda_max: float, method: str):
    ms = list(range(-m_max, m_max + 1))
    levels = _run_all(_levels, [(method, m, b, bc, n_max) for m in ms])
    entries = [(lam, m, n + 1) for m, lv in zip(ms, levels) for n, lam in enumerate(lv)
               if lam <= lambda_max]
    entries.sort()
    return entries


def cmd_spectrum(args, out) -> int:
    if args.m_max < 0 or args.n_max < 1:
        raise UsageError("--m-max must be >= 0 and --n-max >= 1")
    entries = spectrum_rows(args.b, args.bc, args.m_max, args.n_max, args.lambda_max, args.method)
    lines = ["rank,lambda,m,n"]
    lines += [f"{i},{fmt(lam)},{m},{n}" for i, (lam, m, n) in enumerate(entries, start=1)]
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def bracket_row(m: int, n: int, b: float, bc: BoundaryCondition, floor_c: float) -> list[str]:
    """One bracket CSV row; fields that do not apply are left empty."""
    try:
        br = variational.temple_lower(m, b, n, bc, floor_constant=floor_c, strict=False)
        lower, upper, ok = br.lower, br.upper, br.preconditions_ok
    except LandauDiscError:
        lower, upper, ok = math.nan, math.nan, False
    fem = _fem_levels(m, b, bc, n)[n - 1]
    lo, hi = kummeroracle.EIGENVALUE_FIELD_RANGE
    kum = _kummer_levels(m, b, bc, n)[n - 1] if lo <= b <= hi else math.nan
    asym = variational.asymptotic_eig(m, n, b, bc)

    def cell(x):
        return fmt(x) if math.isfinite(x) else ""

    return [str(m), str(n), fmt(b), cell(lower) if ok else "", cell(fem), cell(kum),
            cell(upper), cell(asym), "true" if ok else "false"]


def cmd_bracket(args, out) -> int:
    if args.n < 1 or args.b <= 0:
        raise UsageError("--n must be >= 1 and --b > 0")
    row = bracket_row(args.m, args.n, args.b, args.bc, args.floor_c)
    out.write("m,n,b,temple_lower,fem,kummer,rayleigh_upper,asymptotic,preconditions_ok\n")
    out.write(",".join(row) + "\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    checks = run_suites(args.suite, args.floor_c)
    for c in checks:
        out.write(c.line() + "\n")
    n_fail = sum(not c.passed for c in checks)
    out.write(f"{len(checks) - n_fail}/{len(checks)} checks passed\n")
    return EXIT_OK if n_fail == 0 else EXIT_VERIFY


def figure_rows(bc: BoundaryCondition, grid: list[float]):
    pts = [(m, b, bc) for m in range(FIGURE_M_MAX + 1) for b in grid]
    levels = _run_all(_figure_point, pts)
    rows = [(m, n + 1, b, lam) for (m, b, _), lv in zip(pts, levels) for n, lam in enumerate(lv)]
    rows.sort()
    return rows


def cmd_figure(args, out) -> int:
    if args.bc.kind == "robin":
        raise UsageError("figure supports dirichlet and neumann only")
    grid = b_grid(args.b_min, args.b_max, args.b_steps)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise PermissionError(f"{out_dir} is not writable")
    except OSError as exc:
        raise LandauDiscError(f"cannot write to {out_dir}: {exc}") from exc
    rows = figure_rows(args.bc, grid)
    fig_lines = ["m,n,b,lambda"] + [f"{m},{n},{fmt(b)},{fmt(lam)}" for m, n, b, lam in rows]
    ref_lines = ["b,line,lambda"] + [
        f"{fmt(b)},{k}b,{fmt(k * b)}" for b in grid for k in (1, 3, 5)
    ]
    try:
        (out_dir / f"figure_{args.bc.kind}.csv").write_text("\n".join(fig_lines) + "\n")
        (out_dir / "reference_lines.csv").write_text("\n".join(ref_lines) + "\n")
    except OSError as exc:
        raise LandauDiscError(f"cannot write to {out_dir}: {exc}") from exc
    out.write(f"wrote {len(rows)} rows to {out_dir / f'figure_{args.bc.kind}.csv'}\n")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landaudisc",
        description="Eigenvalue branches of the magnetic Laplacian on the unit disc.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("branch", help="one (m, n) branch over a b grid")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bc", type=_bc, required=True, help="dirichlet | neumann | robin:GAMMA")
    p.add_argument("--b-min", type=float, required=True)
    p.add_argument("--b-max", type=float, required=True)
    p.add_argument("--b-steps", type=int, required=True)
    p.add_argument("--method", choices=["fem", "kummer", "asymptotic", "all"], default="fem")
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("spectrum", help="all branches at one b, merged and sorted")
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--bc", type=_bc, required=True)
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--lambda-max", type=float, required=True)
    p.add_argument("--method", choices=["fem", "kummer"], default="fem")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bracket", help="Temple / Rayleigh-Ritz bracket with both oracles")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--bc", type=_bc, required=True)
    p.add_argument("--floor-c", type=float, default=variational.DEFAULT_FLOOR_C)
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("verify", help="run the built-in self-check suites")
    p.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    p.add_argument("--floor-c", type=float, default=variational.DEFAULT_FLOOR_C)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figure", help="write the branch data behind the two figures")
    p.add_argument("--bc", type=_bc, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--b-min", type=float, default=1.0)
    p.add_argument("--b-max", type=float, default=50.0)
    p.add_argument("--b-steps", type=int, required=True)
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LandauDiscError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
