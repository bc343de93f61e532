"""Acceptance checks with measured margins.

Each check returns a :class:`CheckResult` whose ``margin`` is positive when
the check passes: ``tolerance - worst_error`` for tolerance checks, the
smallest observed slack for strict inequalities, and minus the number of
mismatches for exact counts. Passing ``tolerance`` overrides the stated
tolerance of every tolerance-based check.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import atlas, galerkin, period, solver
from .params import ModelParams

LAMBDAS = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    margin: float
    detail: str
    seconds: float = 0.0


def _tol(override, default):
    return default if override is None else override


def _within(number, name, worst, tol, detail) -> CheckResult:
    return CheckResult(number, name, bool(worst <= tol), tol - worst, f"{detail}; worst {worst:.3g} vs tol {tol:.3g}")


def check_degenerate_period(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-6)
    worst = 0.0
    for lam in LAMBDAS:
        value, _ = period.eta(ModelParams(lam, 1.0), lam / 2 - 1e-10)
        worst = max(worst, abs(value - math.pi / (2 * lam)))
    return _within(1, "degenerate", worst, tol, "eta(lam/2 - 1e-10) vs pi/(2 lam)")


def monotonicity_margins(lam: float, n: int = 50) -> list[float]:
    p = ModelParams(lam, 1.0)
    Ks = (lam / 2) * np.arange(1, n + 1) / (n + 1)
    values = [period.eta(p, float(K)) for K in Ks]
    return [a[0] - b[0] - max(a[1], b[1]) for a, b in zip(values, values[1:])]


def check_monotonicity(tolerance=None) -> CheckResult:
    margin = min(min(monotonicity_margins(lam)) for lam in LAMBDAS)
    return CheckResult(2, "monotonicity", margin > 0, margin, "smallest eta drop minus quadrature error, 50-point K grids")


BRANCH_COUNTS = {(1.0, 0.4): 1, (1.0, 0.6): 2, (1.0, 1.6): 4, (0.5, 2.0): 2, (0.5, 4.0): 5}


def check_branch_counts(tolerance=None) -> CheckResult:
    wrong = []
    for (lam, ell), expected in BRANCH_COUNTS.items():
        got = len(atlas.enumerate_branches(ModelParams(lam, ell)).branches)
        if got != expected:
            wrong.append(f"({lam}, {ell}) gave {got}, listed {expected}")
    detail = "; ".join(wrong) if wrong else "all listed counts reproduced"
    return CheckResult(3, "branches", not wrong, -float(len(wrong)), detail)


def random_pairs(n: int, seed: int, lam_range=(0.25, 3.0), ell_range=(0.1, 5.0)):
    rng = np.random.default_rng(seed)
    return [(float(rng.uniform(*lam_range)), float(rng.uniform(*ell_range))) for _ in range(n)]


def check_constant_volume(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-12)
    worst = 0.0
    for lam, ell in random_pairs(20, seed=4):
        p = ModelParams(lam, ell)
        exact = 4 * math.pi**2 * lam**2 * ell
        sol = solver.constant_solution(p, 64)
        grid = 2 * math.pi * p.period_length * float(np.mean(sol.f**2))
        branch = atlas.constant_branch(p).volume
        worst = max(worst, abs(grid - exact) / exact, abs(branch - exact) / exact)
    return _within(4, "constant-volume", worst, tol, "grid integral and branch record vs 4 pi^2 lam^2 ell")


def bound_pairs(n: int = 30, seed: int = 5):
    """Pairs with 2 lam ell in (1.05, 6): past the branch point, with margins above rounding."""
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n):
        lam = 0.5 if i < 10 else float(rng.uniform(0.25, 3.0))
        x = float(rng.uniform(1.05, 6.0))
        pairs.append((lam, x / (2 * lam)))
    return pairs


def check_volume_bounds(tolerance=None) -> CheckResult:
    margin = math.inf
    failures = []
    for lam, ell in bound_pairs():
        report = atlas.check_bounds(atlas.enumerate_branches(ModelParams(lam, ell)), raise_on_failure=False)
        for c in report.checks:
            margin = min(margin, c.margin)
            if not c.margin > c.err:
                failures.append(f"{c.name} at ({lam:.4g}, {ell:.4g}) margin {c.margin:.3g}")
    detail = "; ".join(failures) if failures else "30 pairs, smallest margin shown"
    return CheckResult(5, "bounds", not failures, margin, detail)


SWEEP_ELLS = (0.6, 1.0, 2.0, 5.0, 20.0, 1e4)


def check_volume_limit(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-2)
    p = ModelParams(1.0, 1.0)
    ceiling = p.volume_ceiling
    gap = abs(solver.volume(p, 1e-8, 1) - ceiling)
    rows = atlas.volume_sweep(p, SWEEP_ELLS)
    vols = [r.volume for r in rows]
    steps = [b - a for a, b in zip(vols, vols[1:])]
    tail = abs(vols[-1] - ceiling)
    ok = gap <= tol and all(s > 0 for s in steps) and all(v <= ceiling for v in vols) and tail <= 1e-3
    margin = min(tol - gap, min(steps), 1e-3 - tail)
    detail = f"|Vol(K=1e-8) - 8 pi| = {gap:.3g}; smallest sweep increment {min(steps):.3g}; ell=1e4 gap {tail:.3g}"
    return CheckResult(6, "limit", ok, margin, detail)


def check_branch_point(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-6)
    worst = 0.0
    for lam in LAMBDAS:
        p = ModelParams(lam, 1 / (2 * lam))
        near = solver.volume(p, lam / 2 - 1e-9, 1)
        worst = max(worst, abs(near - 2 * math.pi**2 * lam) / (2 * math.pi**2 * lam))
        worst = max(worst, abs(p.constant_volume - 2 * math.pi**2 * lam) / (2 * math.pi**2 * lam))
    return _within(7, "continuity", worst, tol, "Vol1(K = lam/2 - 1e-9) and Vol0(ell = 1/(2 lam)) vs 2 pi^2 lam")


def check_ode_residual(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-8)
    p = ModelParams(1.0, 1.0)
    sol = solver.solve(p, 1, 1024)
    defect = float(np.max(np.abs(sol.g**2 - period.f_kernel(p, sol.K, sol.f))))
    worst = max(sol.residual_sup, defect)
    return _within(8, "residual", worst, tol, f"residual {sol.residual_sup:.3g}, first-integral defect {defect:.3g}")


def check_cross_method(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-4)
    p = ModelParams(1.0, 1.0)
    sol = solver.solve(p, 1, 1024)
    # random starts only, so the torus profile cannot seed its own confirmation
    res = galerkin.minimize(p, 64, restarts=8, seed=0, warm_starts=False)
    target = sol.volume / (8 * math.pi)
    rel = abs(res.energy - target) / target
    prof = float(np.max(np.abs(galerkin.aligned_modulus(res.state, sol.f) - np.sqrt(sol.f))))
    return _within(9, "cross-method", max(rel, prof), tol, f"energy rel diff {rel:.3g}, profile sup diff {prof:.3g}")


def check_constant_only(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-6)
    p = ModelParams(1.0, 0.4)
    res = galerkin.minimize(p, 64, restarts=8, seed=0)
    randoms = [r for r in res.runs if r.label.startswith("random")]
    worst = max(abs(r.energy - 0.2 * math.pi) if r.converged else math.inf for r in randoms)
    return _within(10, "constant-only", worst, tol, f"{len(randoms)} random restarts vs 0.2 pi")


SCALING_RATIOS = (0.1, 0.2, 0.3, 0.4)


def check_scaling(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-8)
    worst = 0.0
    for lam in LAMBDAS:
        for r in SCALING_RATIOS:
            lhs = solver.volume(ModelParams(lam, 1.0), r * lam, 1)
            rhs = lam * solver.volume(ModelParams(1.0, lam), r, 1)
            worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return _within(11, "scaling", worst, tol, "volume(lam, K) vs lam volume(1, K/lam)")


def reduction_bound_slacks(p: ModelParams, n: int, seed: int, N: int = 32) -> list[float]:
    """``(1/2) int |u|^4 - ||w(u)||_H^2`` over random u of varied size."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        u = galerkin.random_direction(p, N, rng) * float(rng.uniform(0.1, 4.0))
        w = galerkin.reduction_map(u)
        out.append(0.5 * galerkin.quartic_integral(u) - w.h_norm() ** 2)
    return out


def is_unimodal(values) -> bool:
    d = np.diff(values)
    j = int(np.argmax(values))
    return bool(np.all(d[:j] > 0) and np.all(d[j:] < 0))


def ray_unimodality(p: ModelParams, n: int, seed: int, N: int = 32, samples: int = 40) -> int:
    """Number of random directions whose sampled ray profile is not unimodal."""
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n):
        u = galerkin.random_direction(p, N, rng)
        t_star = galerkin.nehari_scale(u)
        ts = np.linspace(0, 3 * t_star, samples + 1)[1:]
        bad += not is_unimodal(galerkin.ray_profile(u, ts))
    return bad


def gradient_fd_error(p: ModelParams, n: int, seed: int, N: int = 32, h: float = 1e-6) -> float:
    """Worst relative mismatch of E'(psi)[h] against centered differences."""
    rng = np.random.default_rng(seed)
    psi = galerkin.random_direction(p, N, rng) * 2.0
    psi = psi + galerkin.FourierState.from_coeffs(p, galerkin.random_direction(p, N, rng).coeffs * 0.5)
    worst = 0.0
    for _ in range(n):
        d = galerkin.random_direction(p, N, rng)
        exact = galerkin.energy_derivative(psi, d)
        fd = (galerkin.energy(psi + d * h) - galerkin.energy(psi - d * h)) / (2 * h)
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-300))
    return worst


def check_variational(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-6)
    p = ModelParams(1.0, 1.0)
    slack = min(reduction_bound_slacks(p, 100, seed=12))
    bad = ray_unimodality(p, 100, seed=13)
    fd = gradient_fd_error(p, 20, seed=14)
    ok = slack > 0 and bad == 0 and fd <= tol
    detail = f"reduction bound slack {slack:.3g}; non-unimodal rays {bad}/100; gradient fd rel err {fd:.3g}"
    return CheckResult(12, "variational", ok, min(slack, tol - fd, -float(bad) if bad else math.inf), detail)


def check_spectrum(tolerance=None) -> CheckResult:
    tol = _tol(tolerance, 1e-13)
    worst = 0.0
    gap_err = 0.0
    symmetric = True
    for lam, ell in ((1.0, 1.0), (0.5, 2.3), (2.0, 0.7)):
        sp = galerkin.spectral_split(ModelParams(lam, ell), 64)
        dense = np.linalg.eigvalsh(sp.blocks)
        closed = np.stack([-sp.omega, sp.omega], axis=1)
        worst = max(worst, float(np.max(np.abs(dense - closed) / sp.omega[:, None])))
        ev = np.sort(sp.eigenvalues)
        symmetric &= bool(np.array_equal(ev, -ev[::-1]))
        gap_err = max(gap_err, abs(sp.gap - lam))
    ok = worst <= tol and symmetric and gap_err == 0.0
    return CheckResult(13, "spectral", ok, tol - worst, f"eigenvalue rel diff {worst:.3g}; symmetric {symmetric}; gap error {gap_err:.3g}")


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "degenerate": check_degenerate_period,
    "monotonicity": check_monotonicity,
    "branches": check_branch_counts,
    "constant-volume": check_constant_volume,
    "bounds": check_volume_bounds,
    "limit": check_volume_limit,
    "continuity": check_branch_point,
    "residual": check_ode_residual,
    "cross-method": check_cross_method,
    "constant-only": check_constant_only,
    "scaling": check_scaling,
    "variational": check_variational,
    "spectral": check_spectrum,
}


def select(only=None) -> list[str]:
    """Check names matching ``only`` (names or 1-based numbers); all when empty."""
    names = list(CHECKS)
    if not only:
        return names
    chosen = []
    for token in only:
        token = str(token).strip()
        if token.isdigit() and 1 <= int(token) <= len(names):
            token = names[int(token) - 1]
        if token not in CHECKS:
            raise KeyError(f"unknown check {token!r}; choose from {', '.join(names)}")
        if token not in chosen:
            chosen.append(token)
    return chosen


def run(only=None, tolerance=None) -> list[CheckResult]:
    results = []
    for name in select(only):
        start = time.perf_counter()
        res = CHECKS[name](tolerance)
        results.append(
            CheckResult(res.number, res.name, res.passed, res.margin, res.detail, time.perf_counter() - start)
        )
    return results


def format_table(results: list[CheckResult]) -> str:
    lines = [f"{'#':>2}  {'check':<16}{'result':<8}{'margin':>12}{'time[s]':>9}  detail"]
    for r in results:
        lines.append(
            f"{r.number:>2}  {r.name:<16}{'PASS' if r.passed else 'FAIL':<8}{r.margin:>12.3g}{r.seconds:>9.2f}  {r.detail}"
        )
    return "\n".join(lines)
