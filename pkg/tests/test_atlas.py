import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yamabe_torus import BoundViolation, DomainError, ModelParams
from yamabe_torus import atlas, solver
from yamabe_torus.atlas import BifurcationDiagram, BranchRecord


@pytest.mark.parametrize(
    "lam,ell,n_branches",
    [(1.0, 0.4, 1), (1.0, 0.6, 2), (1.0, 1.6, 4), (0.5, 2.0, 2), (1.0, 1.0, 2), (1.0, 1.0 + 1e-9, 3)],
)
def test_enumerate_examples(lam, ell, n_branches):
    diagram = atlas.enumerate_branches(ModelParams(lam, ell))
    assert len(diagram.branches) == n_branches == diagram.d + 1


def test_branch_count_law_random_pairs():
    rng = np.random.default_rng(200)
    for _ in range(200):
        lam = float(rng.uniform(0.2, 3.0))
        ell = float(rng.uniform(0.05, 6.0) / (2 * lam))
        x = 2 * lam * ell
        diagram = atlas.enumerate_branches(ModelParams(lam, ell))
        windings = sorted(b.k for b in diagram.branches if b.kind == "winding")
        assert windings == list(range(1, math.floor(x) + 1))
        assert len(diagram.branches) == diagram.d + 1
        assert diagram.d / (2 * lam) < ell <= (diagram.d + 1) / (2 * lam)


@pytest.mark.parametrize("x,d", [(1.0, 0), (2.0, 1), (3.0, 2), (3.0 + 1e-9, 3), (2.9999999, 2), (0.5, 0)])
def test_branch_count_at_integers(x, d):
    # at 2 lam ell = n the n-th branch coincides with the constant one and is excluded
    assert atlas.branch_count_parameter(ModelParams(1.0, x / 2)) == d


def test_branch_count_guard_on_rounded_integers():
    p = ModelParams(0.1, 30.000000000000004)  # 2 lam ell = 6 up to rounding
    assert atlas.branch_count_parameter(p) == 5


def test_records_are_consistent():
    p = ModelParams(1.0, 1.6)
    diagram = atlas.enumerate_branches(p)
    energies = [b.energy for b in diagram.branches]
    assert energies == sorted(energies)
    for b in diagram.branches:
        assert b.energy * 8 * math.pi == pytest.approx(b.volume, rel=1e-10)
        if b.kind == "winding":
            assert b.half_period == pytest.approx(math.pi * p.ell / b.k, rel=1e-10)
    assert diagram.constant.volume == pytest.approx(4 * math.pi**2 * p.ell)
    with pytest.raises(KeyError):
        diagram.winding(4)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.25, 3.0), x=st.floats(1.05, 7.0))
def test_energy_ordering(lam, x):
    diagram = atlas.enumerate_branches(ModelParams(lam, x / (2 * lam)))
    assert diagram.branches[0].kind == "winding" and diagram.branches[0].k == 1
    assert atlas.energy_ordering(diagram) == []


def test_branch_points_examples():
    assert atlas.branch_points(ModelParams(1.0, 1.0), 3) == [0.5, 1.0, 1.5]
    assert atlas.branch_points(ModelParams(1.0, 1.0), 0) == []
    assert atlas.branch_points(ModelParams(0.5, 1.0), 2) == [1.0, 2.0]
    with pytest.raises(DomainError):
        atlas.branch_points(ModelParams(1.0, 1.0), -1)


def test_check_bounds_examples():
    report = atlas.check_bounds(atlas.enumerate_branches(ModelParams(1.0, 1.0)))
    assert report.passed and len(report.checks) == 2
    assert all(c.margin > 0 for c in report.checks)
    report = atlas.check_bounds(atlas.enumerate_branches(ModelParams(0.5, 2.0)))
    root = report.checks[2]
    assert root.lhs < 2 * math.sqrt(math.pi) and root.margin > 0


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_check_bounds_near_branch_point(lam):
    p = ModelParams(lam, 1 / (2 * lam) + 1e-6)
    diagram = atlas.enumerate_branches(p)
    assert diagram.winding(1).volume == pytest.approx(2 * math.pi**2 * lam, abs=1e-3)
    assert atlas.check_bounds(diagram).passed


def test_check_bounds_errors():
    with pytest.raises(DomainError):
        atlas.check_bounds(atlas.enumerate_branches(ModelParams(1.0, 0.4)))
    p = ModelParams(1.0, 1.0)
    fake = BifurcationDiagram(
        p, 1, [atlas.constant_branch(p), BranchRecord("winding", 1, 0.01, 30.0, 30.0 / (8 * math.pi), math.pi)]
    )
    with pytest.raises(BoundViolation) as info:
        atlas.check_bounds(fake)
    assert info.value.margin < 0
    report = atlas.check_bounds(fake, raise_on_failure=False)
    assert not report.passed


def test_volume_sweep_examples():
    p = ModelParams(1.0, 1.0)
    rows = atlas.volume_sweep(p, [0.6, 1.0, 2.0, 5.0, 20.0])
    vols = [r.volume for r in rows]
    assert all(b > a for a, b in zip(vols, vols[1:]))
    assert all(v < 8 * math.pi + 1e-12 for v in vols)
    assert vols[0] > 2 * math.pi**2
    far = atlas.volume_sweep(p, [1e4])[0]
    assert far.asymptotic
    assert abs(far.volume - 8 * math.pi) < 1e-3
    assert far.log_K == pytest.approx(math.log(8) - 2e4 * math.pi)


def test_volume_sweep_errors():
    p = ModelParams(1.0, 1.0)
    with pytest.raises(DomainError):
        atlas.volume_sweep(p, [1.0, 0.8])
    with pytest.raises(DomainError):
        atlas.volume_sweep(p, [0.5, 1.0])


def test_sweep_matches_direct_solves():
    p = ModelParams(0.5, 1.0)
    rows = atlas.volume_sweep(p, [1.5, 3.0])
    for r in rows:
        K, _ = solver.solve_K(p.with_ell(r.ell), math.pi * r.ell)
        assert r.K == K


def test_sweep_is_order_independent(monkeypatch):
    p = ModelParams(1.0, 1.0)
    grid = [0.7, 1.3, 2.2, 3.1]
    monkeypatch.setenv("SYT_THREADS", "1")
    serial = atlas.sweep_to_csv(atlas.volume_sweep(p, grid), p)
    monkeypatch.setenv("SYT_THREADS", "4")
    threaded = atlas.sweep_to_csv(atlas.volume_sweep(p, grid), p)
    assert serial == threaded


def test_csv_export():
    diagram = atlas.enumerate_branches(ModelParams(1.0, 1.6))
    lines = atlas.to_csv(diagram).splitlines()
    assert lines[0] == "lambda,ell,branch_kind,k,K,half_period,volume,energy,margin_const,margin_8pilambda"
    kinds = [line.split(",")[2] for line in lines[1:]]
    ks = [int(line.split(",")[3]) for line in lines[1:]]
    assert kinds == ["constant", "winding", "winding", "winding"] and ks == [0, 1, 2, 3]
    volume = lines[2].split(",")[6]
    assert float(volume) == diagram.winding(1).volume
    assert all(len(line.split(",")) == 10 for line in lines)
    two = atlas.to_csv([diagram, atlas.enumerate_branches(ModelParams(1.0, 0.4))])
    assert len(two.splitlines()) == 6
