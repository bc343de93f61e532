import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eta_alg_weight, eta_mpmath, roots_direct
from yamabe_torus import DegenerateError, DomainError, ModelParams, ToleranceError
from yamabe_torus import period

# Frozen from eta_mpmath / eta_alg_weight (40-digit tanh-sinh on the s-form).
GOLDEN_ETA_1_025 = 1.854074677301372

P1 = ModelParams(1.0, 1.0)


def test_params_validation():
    with pytest.raises(DomainError):
        ModelParams(0.0, 1.0)
    with pytest.raises(DomainError):
        ModelParams(1.0, -2.0)
    with pytest.raises(DomainError):
        ModelParams(float("nan"), 1.0)
    p = ModelParams(2.0, 0.5)
    assert p.constant_K == 1.0
    assert p.min_half_period == pytest.approx(math.pi / 4)
    assert p.first_branch_point == 0.25


@pytest.mark.parametrize(
    "lam,K,expected",
    [
        (1.0, 0.5, (1.0, 1.0)),
        (1.0, 0.375, (0.5, 1.5)),
        (2.0, 1.0, (2.0, 2.0)),  # K = lam/2: double root
        (2.0, 0.5, (2 - math.sqrt(2), 2 + math.sqrt(2))),
    ],
)
def test_roots_examples(lam, K, expected):
    p = ModelParams(lam, 1.0)
    s0, s1 = period.roots(p, K)
    assert s0 == pytest.approx(expected[0], rel=1e-14)
    assert s1 == pytest.approx(expected[1], rel=1e-14)
    assert abs(period.f_kernel(p, K, s0)) < 1e-14
    assert abs(period.f_kernel(p, K, s1)) < 1e-14


@pytest.mark.parametrize("K", [0.0, -0.1, 0.5000001, float("nan")])
def test_roots_domain(K):
    with pytest.raises(DomainError, match="K outside"):
        period.roots(P1, K)


@given(lam=st.floats(0.05, 20.0), frac=st.floats(1e-9, 1.0))
def test_vieta(lam, frac):
    p = ModelParams(lam, 1.0)
    K = frac * lam / 2
    s0, s1 = period.roots(p, K)
    assert 0 < s0 <= s1
    assert s0 + s1 == pytest.approx(2 * lam, rel=1e-12)
    assert s0 * s1 == pytest.approx(2 * lam * K, rel=1e-12)


def test_f_kernel_examples():
    assert period.f_kernel(P1, 0.5, 1.0) == 0.0
    assert period.f_kernel(P1, 0.375, 1.0) == pytest.approx(0.234375, rel=1e-15)
    assert period.f_kernel_factored(P1, 0.375, 1.0) == pytest.approx(0.5 * 0.5 * 0.5 * 1.875, rel=1e-15)
    assert period.f_kernel(P1, 0.375, 0.5) == 0.0
    with pytest.raises(DomainError):
        period.f_kernel(P1, 0.25, -0.1)


@given(lam=st.floats(0.1, 10.0), frac=st.floats(0.01, 0.99), x=st.floats(0.0, 1.0))
def test_f_kernel_two_forms_agree(lam, frac, x):
    p = ModelParams(lam, 1.0)
    K = frac * lam / 2
    s0, s1 = period.roots(p, K)
    s = s0 + x * (s1 - s0)
    direct = period.f_kernel(p, K, s)
    factored = period.f_kernel_factored(p, K, s)
    assert abs(direct - factored) <= 1e-12 * max(1.0, s1**2)


@given(lam=st.floats(0.1, 10.0), frac=st.floats(0.001, 0.999), x=st.floats(0.0, 1.0))
def test_f_kernel_positive_inside(lam, frac, x):
    p = ModelParams(lam, 1.0)
    K = frac * lam / 2
    s0, s1 = period.roots(p, K)
    s = s0 + (0.01 + 0.98 * x) * (s1 - s0)
    assert period.f_kernel_factored(p, K, s) > 0


def test_s_theta_two_forms_agree():
    lam, K = 1.3, 0.41
    p = ModelParams(lam, 1.0)
    theta = np.linspace(0, math.pi / 2, 101)
    a = period.s_of_theta(p, K, theta)
    b = lam - math.sqrt(lam**2 - 2 * lam * K) * (1 - 2 * np.sin(theta) ** 2)
    assert np.max(np.abs(a - b)) < 1e-14


def test_eta_golden_and_oracles():
    value, err = period.eta(P1, 0.25)
    assert err < 1e-10
    assert value == pytest.approx(GOLDEN_ETA_1_025, abs=1e-12)
    assert value == pytest.approx(eta_mpmath(1.0, 0.25), abs=1e-12)
    assert value == pytest.approx(eta_alg_weight(1.0, 0.25, factored=True), abs=1e-12)
    # defining-formula prefactor 1/(2 lam sqrt(F_K)) against the factored form
    assert eta_alg_weight(1.0, 0.25, factored=False) == pytest.approx(value, abs=1e-9)


@pytest.mark.parametrize("lam,K", [(0.5, 0.01), (2.0, 0.7), (1.0, 1e-6), (3.0, 1.49)])
def test_eta_against_mpmath(lam, K):
    value, err = period.eta(ModelParams(lam, 1.0), K)
    assert value == pytest.approx(eta_mpmath(lam, K), abs=1e-10)


def test_eta_examples():
    value, _ = period.eta(P1, 0.5 - 1e-10)
    assert value == pytest.approx(math.pi / 2, abs=1e-6)
    s0, _ = period.roots(P1, 0.25)
    assert period.eta(P1, 0.25, s0) == (0.0, 0.0)


def test_eta_partial_is_increasing():
    K = 0.2
    s0, s1 = period.roots(P1, K)
    fs = np.linspace(s0, s1, 40)
    vals = [period.eta(P1, K, float(f))[0] for f in fs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(period.eta(P1, K)[0], abs=1e-12)


def test_eta_errors():
    s0, s1 = period.roots(P1, 0.25)
    with pytest.raises(DomainError):
        period.eta(P1, 0.25, s1 + 1e-6)
    with pytest.raises(DomainError):
        period.eta(P1, 0.25, s0 - 1e-6)
    with pytest.raises(DegenerateError):
        period.eta(P1, 0.5)
    with pytest.raises(DegenerateError):
        period.eta(P1, 0.5 - 1e-13)



def test_theta_integral_reports_nonconvergence():
    kink = lambda x: np.abs(x - 0.3)
    with pytest.raises(ToleranceError):
        period.theta_integral(kink, np.array([0.0, 1.0]), 1e-15)
    value, err = period.theta_integral(np.cos, np.array([0.0, math.pi / 2]), 1e-14)
    assert value == pytest.approx(1.0, abs=1e-14) and err <= 1e-14


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_eta_monotone_in_K(lam):
    p = ModelParams(lam, 1.0)
    Ks = (lam / 2) * np.arange(1, 51) / 51
    vals = [period.eta(p, float(K)) for K in Ks]
    for (a, ea), (b, eb) in zip(vals, vals[1:]):
        assert a > b + max(ea, eb)
        assert b >= math.pi / (2 * lam) - eb


def test_eta_diverges_as_K_vanishes():
    a, _ = period.eta(P1, 1e-6)
    b, _ = period.eta(P1, 1e-8)
    assert a > 5
    assert b > a


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_degenerate_limit(lam):
    value, _ = period.eta(ModelParams(lam, 1.0), lam / 2 - 1e-10)
    assert value == pytest.approx(math.pi / (2 * lam), abs=1e-6)


@settings(max_examples=50)
@given(lam=st.floats(0.2, 5.0), frac=st.floats(1e-6, 0.999))
def test_eta_scaling_covariance(lam, frac):
    K = frac * lam / 2
    a, ea = period.eta(ModelParams(lam, 1.0), K)
    b, eb = period.eta(ModelParams(1.0, 1.0), K / lam)
    assert a == pytest.approx(b / lam, abs=10 * (ea + eb / lam) + 1e-12 * a)


def test_small_K_asymptotics():
    for K in (1e-10, 1e-14):
        value, _ = period.eta(P1, K)
        assert value == pytest.approx(period.asymptotic_half_period(P1, K), abs=1e-6)
    target = 30.0
    assert period.asymptotic_half_period(P1, math.exp(period.asymptotic_log_K(P1, target))) == pytest.approx(target)


def test_volume_integral_limits():
    assert period.volume_integral(P1, 0.5) == (math.pi / 2, 0.0)
    near, _ = period.volume_integral(P1, 0.5 - 1e-9)
    assert 4 * math.pi * near == pytest.approx(2 * math.pi**2, rel=1e-8)


def test_gauss_legendre_cached_readonly():
    x, w = period.gauss_legendre(16)
    assert period.gauss_legendre(16)[0] is x
    assert w.sum() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        x[0] = 0.0


def test_roots_direct_oracle_consistency():
    for lam, K in [(1.0, 0.3), (0.7, 0.1)]:
        assert period.roots(ModelParams(lam, 1.0), K) == pytest.approx(roots_direct(lam, K), rel=1e-13)
