"""Branch enumeration, bifurcation points and volume bounds at fixed (lam, ell)."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

from . import period, solver
from ._parallel import ordered_map
from .errors import BoundViolation, DomainError, UnderflowError
from .params import ModelParams

_INTEGER_GUARD = 1e-12
CSV_HEADER = (
    "lambda",
    "ell",
    "branch_kind",
    "k",
    "K",
    "half_period",
    "volume",
    "energy",
    "margin_const",
    "margin_8pilambda",
)


@dataclass(frozen=True)
class BranchRecord:
    kind: str  # "constant" or "winding"
    k: int
    K: float
    volume: float
    energy: float
    half_period: float
    volume_err: float = 0.0


@dataclass(frozen=True)
class BifurcationDiagram:
    params: ModelParams
    d: int
    branches: list[BranchRecord]

    def winding(self, k: int) -> BranchRecord:
        for b in self.branches:
            if b.kind == "winding" and b.k == k:
                return b
        raise KeyError(k)

    @property
    def constant(self) -> BranchRecord:
        return next(b for b in self.branches if b.kind == "constant")


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    err: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin > -self.err


@dataclass(frozen=True)
class BoundReport:
    params: ModelParams
    checks: list[BoundCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def branch_count_parameter(params: ModelParams) -> int:
    """d with d/(2 lam) < ell <= (d+1)/(2 lam)."""
    x = 2 * params.lam * params.ell
    nearest = round(x)
    if abs(x - nearest) <= _INTEGER_GUARD * max(1.0, x):
        x = float(nearest)
    return max(math.ceil(x) - 1, 0)


def branch_points(params: ModelParams, k_max: int) -> list[float]:
    """Circumference factors k/(2 lam), k = 1..k_max, where winding branches detach."""
    if k_max < 0:
        raise DomainError("k_max must be nonnegative")
    return [k / (2 * params.lam) for k in range(1, k_max + 1)]


def constant_branch(params: ModelParams) -> BranchRecord:
    vol = params.constant_volume
    return BranchRecord("constant", 0, params.constant_K, vol, vol / (8 * math.pi), math.nan)


def winding_branch(params: ModelParams, k: int) -> BranchRecord:
    target = math.pi * params.ell / k
    K, _ = solver.solve_K(params, target)
    vol, err = solver.volume_with_error(params, K, k)
    return BranchRecord("winding", k, K, vol, vol / (8 * math.pi), target, err)


def enumerate_branches(params: ModelParams) -> BifurcationDiagram:
    """Constant branch plus one winding branch for each k = 1..d, sorted by energy."""
    d = branch_count_parameter(params)
    branches = [constant_branch(params)]
    branches += ordered_map(lambda k: winding_branch(params, k), range(1, d + 1))
    branches.sort(key=lambda b: b.energy)
    return BifurcationDiagram(params=params, d=d, branches=branches)


def check_bounds(diagram: BifurcationDiagram, raise_on_failure: bool = True) -> BoundReport:
    """Single-winding volume against the constant-branch volume and 8 pi lam."""
    if diagram.d < 1:
        raise DomainError("volume bounds need at least one winding branch (d >= 1)")
    p = diagram.params
    first = diagram.winding(1)
    err = first.volume_err + 1e-14 * first.volume
    checks = [
        BoundCheck("Vol1 < 4 pi^2 lam^2 ell", first.volume, p.constant_volume, err),
        BoundCheck("Vol1 < 8 pi lam", first.volume, p.volume_ceiling, err),
    ]
    if p.lam == 0.5:
        root_err = err / (2 * math.sqrt(first.volume))
        checks.append(
            BoundCheck("Vol1^(1/2) < 2 sqrt(pi)", math.sqrt(first.volume), 2 * math.sqrt(math.pi), root_err)
        )
    report = BoundReport(p, checks)
    if raise_on_failure:
        for c in checks:
            if not c.passed:
                raise BoundViolation(c.name, c.margin)
    return report


def energy_ordering(diagram: BifurcationDiagram) -> list[int]:
    """Winding numbers k >= 2 whose energy is not strictly above the k = 1 branch.

    Only k = 1 versus the constant branch is proven; the k >= 2 ordering is
    monitored, and an empty list means no counterexample was seen.
    """
    if diagram.d < 1:
        return []
    e1 = diagram.winding(1).energy
    return [b.k for b in diagram.branches if b.kind == "winding" and b.k >= 2 and not b.energy > e1]


@dataclass(frozen=True)
class SweepRow:
    ell: float
    K: float
    log_K: float
    volume: float
    asymptotic: bool


def _sweep_row(params: ModelParams) -> SweepRow:
    target = math.pi * params.ell
    try:
        K, _ = solver.solve_K(params, target)
    except UnderflowError:
        log_K = period.asymptotic_log_K(params, target)
        K = math.exp(log_K)
        return SweepRow(params.ell, K, log_K, params.volume_ceiling - 4 * math.pi * K, True)
    return SweepRow(params.ell, K, math.log(K), solver.volume(params, K, 1), False)


def volume_sweep(params_base: ModelParams, ell_grid) -> list[SweepRow]:
    """Single-winding branch along a strictly increasing ell grid above 1/(2 lam).

    Rows whose K underflows double precision use the small-K expansion and
    are flagged ``asymptotic``.
    """
    ells = [float(x) for x in ell_grid]
    if any(b <= a for a, b in zip(ells, ells[1:])):
        raise DomainError("ell_grid must be strictly increasing")
    if ells and ells[0] <= params_base.first_branch_point:
        raise DomainError("every ell must exceed 1/(2λ)")
    return ordered_map(lambda ell: _sweep_row(params_base.with_ell(ell)), ells)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def diagram_rows(diagram: BifurcationDiagram) -> list[list[str]]:
    p = diagram.params
    ordered = sorted(diagram.branches, key=lambda b: (b.kind != "constant", b.k))
    rows = []
    for b in ordered:
        rows.append(
            [
                _fmt(p.lam),
                _fmt(p.ell),
                b.kind,
                _fmt(b.k),
                _fmt(b.K),
                _fmt(b.half_period),
                _fmt(b.volume),
                _fmt(b.energy),
                _fmt(p.constant_volume - b.volume),
                _fmt(p.volume_ceiling - b.volume),
            ]
        )
    return rows


def to_csv(diagrams) -> str:
    """CSV export; accepts one diagram or an iterable of diagrams."""
    if isinstance(diagrams, BifurcationDiagram):
        diagrams = [diagrams]
    out = io.StringIO()
    out.write(",".join(CSV_HEADER) + "\n")
    for diagram in diagrams:
        for row in diagram_rows(diagram):
            out.write(",".join(row) + "\n")
    return out.getvalue()


def sweep_to_csv(rows: list[SweepRow], params_base: ModelParams) -> str:
    out = io.StringIO()
    out.write("lambda,ell,K,log_K,volume,asymptotic\n")
    for r in rows:
        out.write(
            ",".join([_fmt(params_base.lam), _fmt(r.ell), _fmt(r.K), _fmt(r.log_K), _fmt(r.volume), str(int(r.asymptotic))])
            + "\n"
        )
    return out.getvalue()
