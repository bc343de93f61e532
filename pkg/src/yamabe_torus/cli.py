"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 domain error,
3 no such branch.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__, atlas, galerkin, period, records, solver, verify
from .errors import (
    BracketError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    NoBranchError,
    ToleranceError,
)
from .params import ModelParams

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_DOMAIN = 2
EXIT_NO_BRANCH = 3

DEFAULTS = {"grid": 1024, "modes": 64, "restarts": 8, "seed": 0, "tolerance": 1e-10}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _params(args) -> ModelParams:
    if args.lam is None:
        raise DomainError("--lambda is required")
    ell = 1.0 if getattr(args, "ell", None) is None else args.ell
    return ModelParams(args.lam, ell)


def run_period(args) -> int:
    p = _params(args)
    if args.K is None:
        raise DomainError("--K is required")
    tol = args.tolerance if args.tolerance is not None else DEFAULTS["tolerance"]
    s0, s1 = period.roots(p, args.K)
    try:
        value, err = period.eta(p, args.K, tol=tol)
    except DegenerateError:
        value, err = math.pi / (2 * p.lam), 0.0
    print(f"s0={s0!r} s1={s1!r} eta={value!r} err={err!r}")
    return EXIT_OK


def _solution(p: ModelParams, k: int, n_grid: int) -> solver.TorusSolution:
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k == 0:
        return solver.constant_solution(p, n_grid)
    d = atlas.branch_count_parameter(p)
    if k > d:
        windings = f"constant plus k = 1..{d}" if d else "constant only"
        raise NoBranchError(
            f"no winding-{k} branch at λ={p.lam!r}, ℓ={p.ell!r}: d={d}, "
            f"d+1 inequivalent solutions = {d + 1} ({windings})"
        )
    return solver.solve(p, k, n_grid)


def run_solve(args) -> int:
    p = _params(args)
    k = 1 if args.k is None else args.k
    sol = _solution(p, k, args.grid or DEFAULTS["grid"])
    text = records.solution_to_json(sol)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(f"K={sol.K!r} volume={sol.volume!r} residual_sup={sol.residual_sup!r}", file=sys.stderr if not args.out else sys.stdout)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


def run_bifurcate(args) -> int:
    p = _params(args)
    diagram = atlas.enumerate_branches(p)
    if args.format == "json":
        rows = [dict(zip(atlas.CSV_HEADER, r)) for r in atlas.diagram_rows(diagram)]
        text = records.dumps({"kind": "bifurcation-diagram", "version": __version__, "d": diagram.d, "rows": rows})
    else:
        text = atlas.to_csv(diagram)
    _emit(text, args.out)
    return EXIT_OK


def _ell_grid(args) -> list[float]:
    if args.ells:
        return [float(x) for x in args.ells.split(",")]
    lo = 1 / (2 * args.lam)
    return [lo * f for f in (1.2, 2.0, 4.0, 10.0, 40.0)]


def run_sweep(args) -> int:
    p = _params(args)
    rows = atlas.volume_sweep(p, _ell_grid(args))
    if args.format == "json":
        body = [
            {"ell": r.ell, "K": r.K, "log_K": r.log_K, "volume": r.volume, "asymptotic": r.asymptotic} for r in rows
        ]
        text = records.dumps({"kind": "volume-sweep", "version": __version__, "lambda": p.lam, "rows": body})
    else:
        text = atlas.sweep_to_csv(rows, p)
    _emit(text, args.out)
    return EXIT_OK


def run_galerkin(args) -> int:
    p = _params(args)
    res = galerkin.minimize(
        p,
        N=args.modes or DEFAULTS["modes"],
        restarts=args.restarts or DEFAULTS["restarts"],
        seed=DEFAULTS["seed"] if args.seed is None else args.seed,
    )
    _emit(records.galerkin_to_json(res), args.out)
    if args.out:
        print(f"energy={res.energy!r} gradient_norm={res.gradient_norm!r} nehari_residual={res.nehari_residual!r}")
    return EXIT_OK


def run_verify(args) -> int:
    try:
        names = verify.select(args.only)
    except KeyError as exc:
        raise DomainError(str(exc.args[0])) from None
    results = verify.run(names, tolerance=args.tolerance)
    table = verify.format_table(results)
    print(table)
    if args.out:
        Path(args.out).write_text(table + "\n", encoding="utf-8")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY_FAILED


COMMANDS = {
    "period": run_period,
    "solve": run_solve,
    "bifurcate": run_bifurcate,
    "sweep": run_sweep,
    "galerkin": run_galerkin,
    "verify": run_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, help="eigenvalue λ on the second circle")
    common.add_argument("--ell", type=float, help="circumference factor ℓ (length 2πℓ)")
    common.add_argument("--K", type=float, help="first-integral constant in (0, λ/2]")
    common.add_argument("--k", type=int, help="winding number (0 = constant branch)")
    common.add_argument("--grid", type=int, help="samples per circumference, power of two (default 1024)")
    common.add_argument("--modes", type=int, help="Fourier truncation N (default 64)")
    common.add_argument("--restarts", type=int, help="random restarts (default 8)")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument(
        "--tolerance",
        type=float,
        help="quadrature tolerance (default 1e-10); for verify, overrides every check tolerance",
    )
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("--format", choices=("json", "csv"), default="csv", help="table format")

    parser = argparse.ArgumentParser(prog="yamabe-torus", description="Periodic spinor solutions on flat tori.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("period", parents=[common], help="roots of F_K and the half period")
    sub.add_parser("solve", parents=[common], help="reconstruct a branch and write its JSON record")
    sub.add_parser("bifurcate", parents=[common], help="all branches at (λ, ℓ)")
    sweep = sub.add_parser("sweep", parents=[common], help="single-winding volume along an ℓ grid")
    sweep.add_argument("--ells", help="comma-separated increasing ℓ values")
    sub.add_parser("galerkin", parents=[common], help="variational ground state")
    ver = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    ver.add_argument("--only", nargs="+", help="check names or numbers to run")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NoBranchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_BRANCH
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ToleranceError, ConvergenceError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED


if __name__ == "__main__":
    sys.exit(main())
