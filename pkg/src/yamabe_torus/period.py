"""First-integral kernel F_K, its roots, and the period integral eta_K.

All integrals over ``[s0, s1]`` carry inverse square-root singularities at
both ends. They are evaluated after the substitution

    s = s0 + (s1 - s0) * sin(theta)**2,   theta in [0, pi/2],

which turns ``ds / (2*lam*sqrt(F_K(s)))`` into the smooth form
``2 dtheta / sqrt(Q(s))`` with ``Q(s) = s**2 + 2*lam*s + 2*lam*K``. For small K
the integrand develops a boundary layer of width ``sqrt(K/lam)`` at
``theta = 0``; panels are graded geometrically through that layer and
Gauss-Legendre order is doubled on every panel until two successive
composite sums agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DegenerateError, DomainError, ToleranceError
from .params import ModelParams

DEGENERATE_GAP = 1e-12
DEFAULT_TOL = 1e-10
_MIN_ORDER = 8
_MAX_ORDER = 512


@dataclass(frozen=True)
class PeriodResult:
    K: float
    s0: float
    s1: float
    eta: float
    err: float


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], cached and read-only."""
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _check_K(params: ModelParams, K: float) -> None:
    if not (K > 0 and K <= params.lam / 2):
        raise DomainError(f"K outside (0, λ/2]: K={K!r}, λ/2={params.lam / 2!r}")


def is_degenerate(params: ModelParams, K: float) -> bool:
    return K >= params.lam / 2 - DEGENERATE_GAP


def branch_geometry(params: ModelParams, K: float) -> tuple[float, float, float]:
    """Return ``(s0, s1, delta)`` with ``delta = sqrt(lam**2 - 2*lam*K) = (s1 - s0)/2``.

    ``s0`` comes from the product of the roots so that it keeps full relative
    accuracy when K is tiny.
    """
    _check_K(params, K)
    lam = params.lam
    delta = math.sqrt(lam * (lam - 2 * K))
    s1 = lam + delta
    s0 = 2 * lam * K / s1
    return s0, s1, delta


def roots(params: ModelParams, K: float) -> tuple[float, float]:
    """Zeros ``s0 <= s1`` of F_K, i.e. of ``s**2 - 2*lam*s + 2*lam*K``."""
    s0, s1, _ = branch_geometry(params, K)
    return s0, s1


def f_kernel(params: ModelParams, K: float, s):
    """F_K(s) = s**2 - (s**2/(2 lam) + K)**2."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("F_K is only defined for s >= 0")
    lam = params.lam
    value = s**2 - (s**2 / (2 * lam) + K) ** 2
    return float(value) if value.ndim == 0 else value


def f_kernel_factored(params: ModelParams, K: float, s):
    """F_K through its root factorization; must agree with :func:`f_kernel`."""
    s = np.asarray(s, dtype=float)
    lam = params.lam
    s0, s1 = roots(params, K)
    value = (s - s0) * (s1 - s) * (s + s**2 / (2 * lam) + K) / (2 * lam)
    return float(value) if value.ndim == 0 else value


def s_of_theta(params: ModelParams, K: float, theta):
    s0, _, delta = branch_geometry(params, K)
    return s0 + 2 * delta * np.sin(theta) ** 2


def q_of_s(params: ModelParams, K: float, s):
    lam = params.lam
    return s * (s + 2 * lam) + 2 * lam * K


def panel_edges(params: ModelParams, K: float, theta_hi: float = math.pi / 2) -> np.ndarray:
    """Panel breakpoints on [0, theta_hi], doubling in width away from theta = 0."""
    width = math.sqrt(K / params.lam)
    edges = [0.0]
    x = width
    while x < math.pi / 2 and x < theta_hi:
        edges.append(x)
        x *= 2
    if edges[-1] > theta_hi / 1.5 and len(edges) > 1:
        edges.pop()
    edges.append(theta_hi)
    return np.asarray(edges)


def _composite(integrand, edges: np.ndarray, n: int) -> float:
    x, w = gauss_legendre(n)
    a = edges[:-1, None]
    half = 0.5 * np.diff(edges)[:, None]
    nodes = a + half * (x + 1)
    return float(np.sum(half * w * integrand(nodes)))


def theta_integral(integrand, edges: np.ndarray, tol: float) -> tuple[float, float]:
    """Composite Gauss-Legendre with order doubling; returns ``(value, err)``."""
    if edges[-1] <= edges[0]:
        return 0.0, 0.0
    prev = _composite(integrand, edges, _MIN_ORDER)
    n = 2 * _MIN_ORDER
    while n <= _MAX_ORDER:
        cur = _composite(integrand, edges, n)
        err = abs(cur - prev)
        if err <= tol:
            return cur, err
        prev = cur
        n *= 2
    raise ToleranceError(f"quadrature did not reach tolerance {tol:g} (last difference {err:.3g})")


def _eta_integrand(params: ModelParams, K: float):
    s0, _, delta = branch_geometry(params, K)
    lam = params.lam

    def integrand(theta):
        s = s0 + 2 * delta * np.sin(theta) ** 2
        return 2.0 / np.sqrt(s * (s + 2 * lam) + 2 * lam * K)

    return integrand


def _volume_integrand(params: ModelParams, K: float):
    s0, _, delta = branch_geometry(params, K)
    lam = params.lam

    def integrand(theta):
        s = s0 + 2 * delta * np.sin(theta) ** 2
        return 2.0 * s**2 / np.sqrt(s * (s + 2 * lam) + 2 * lam * K)

    return integrand


def eta(params: ModelParams, K: float, f_upper: float | None = None, tol: float = DEFAULT_TOL):
    """Partial period ``eta_K(f_upper)``; the full half period when ``f_upper`` is None.

    Returns ``(value, err)`` where ``err`` is the difference between the last
    two levels of the order-doubling sequence.
    """
    _check_K(params, K)
    if is_degenerate(params, K):
        raise DegenerateError(
            f"K={K!r} is within {DEGENERATE_GAP:g} of λ/2; the half period is the limit π/(2λ)"
        )
    s0, s1, delta = branch_geometry(params, K)
    if f_upper is None:
        theta_hi = math.pi / 2
    else:
        if not (s0 <= f_upper <= s1):
            raise DomainError(f"f_upper={f_upper!r} outside [s0, s1] = [{s0!r}, {s1!r}]")
        ratio = min(max((f_upper - s0) / (2 * delta), 0.0), 1.0)
        theta_hi = math.asin(math.sqrt(ratio))
    edges = panel_edges(params, K, theta_hi)
    return theta_integral(_eta_integrand(params, K), edges, tol)


def half_period(params: ModelParams, K: float, tol: float = DEFAULT_TOL) -> PeriodResult:
    """Roots and full half period ``eta_K(s1)`` bundled together."""
    value, err = eta(params, K, tol=tol)
    s0, s1 = roots(params, K)
    return PeriodResult(K=K, s0=s0, s1=s1, eta=value, err=err)


def volume_integral(params: ModelParams, K: float, tol: float = 1e-13) -> tuple[float, float]:
    """``(1/(2 lam)) * int_{s0}^{s1} s**2 / sqrt(F_K(s)) ds`` in its smooth theta form.

    Multiplying by ``4*pi*k`` gives the volume of the k-winding solution.
    """
    _check_K(params, K)
    if is_degenerate(params, K):
        return math.pi * params.lam / 2, 0.0
    edges = panel_edges(params, K)
    return theta_integral(_volume_integrand(params, K), edges, tol * max(1.0, params.lam))


# Small-K asymptotics, used only where K underflows double precision:
#   eta_K(s1) = (ln(lam/K)/2 + 3 ln 2 / 2) / lam + O(K ln K)
#   4*pi*volume_integral = 8*pi*lam - 4*pi*K + O(K**2 ln K)
def asymptotic_log_K(params: ModelParams, half_period_target: float) -> float:
    lam = params.lam
    return math.log(8 * lam) - 2 * lam * half_period_target


def asymptotic_half_period(params: ModelParams, K: float) -> float:
    lam = params.lam
    return (0.5 * math.log(lam / K) + 1.5 * math.log(2)) / lam
