"""Periodic profiles of the reduced torus system and their spinor lift.

The profile ``f = 2(u**2 + v**2)`` of a non-constant solution oscillates
between the roots ``s0 < s1`` of F_K. Writing ``f = s0 + (s1 - s0) sin(theta)**2``
the phase ``theta`` is a smooth increasing function of ``t`` with
``d theta/dt = sqrt(Q(f))/2``; one full oscillation of ``f`` corresponds to
``theta`` advancing by ``pi``. Profiles are built by inverting
``t = Theta(theta)``, the partial period integral in the theta variable, at
every grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import period
from .errors import DomainError, NoBranchError, ToleranceError, UnderflowError
from .params import ModelParams

RESIDUAL_BUDGET = 1e-6
SOLVE_TOL = 1e-10
_Z_NEAR_DEGENERATE = math.log(1e-5 / (1 - 1e-5))
_Z_FLOOR = 660.0
_INNER_ORDER = 32
_MAX_PANEL = math.pi / 32


@dataclass(frozen=True, eq=False)
class TorusSolution:
    params: ModelParams
    K: float
    k: int
    grid_t: np.ndarray
    f: np.ndarray
    g: np.ndarray
    u: np.ndarray
    v: np.ndarray
    volume: float
    residual_sup: float

    @property
    def n_grid(self) -> int:
        return len(self.grid_t)

    @property
    def is_constant(self) -> bool:
        return self.k == 0


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Two-component profile; the field on the torus is ``(psi1, psi2) * exp(-i lam tau)``."""

    solution: TorusSolution
    theta: float
    psi1: np.ndarray = field(repr=False)
    psi2: np.ndarray = field(repr=False)


def _K_from_z(lam: float, z: float) -> float:
    # delta = lam*sigmoid(z); K = (lam - delta)(lam + delta)/(2 lam)
    if z >= 0:
        e = math.exp(-z)
        low = e / (1 + e)
    else:
        low = 1 / (1 + math.exp(z))
    return 0.5 * lam * low * (2 - low)


def solve_K(params: ModelParams, half_period_target: float, tol: float = SOLVE_TOL):
    """First-integral constant whose half period equals ``half_period_target``.

    The half period decreases strictly in K, so the root is bracketed and
    found with Brent's method on ``z = logit(delta/lam)``, a variable that
    resolves both ends of ``(0, lam/2)``. Returns ``(K, err)`` with
    ``err >= |eta(K) - target|``.
    """
    lam = params.lam
    floor = params.min_half_period
    if not half_period_target > floor:
        raise NoBranchError(
            f"half period {half_period_target!r} <= π/(2λ) = {floor!r}: only the constant solution exists"
        )
    budget = tol * max(1.0, half_period_target)
    quad_tol = 1e-3 * budget

    def excess(z):
        return period.eta(params, _K_from_z(lam, z), tol=quad_tol)[0] - half_period_target

    if excess(_Z_NEAR_DEGENERATE) >= 0:
        # eta = pi/(2 lam) + pi delta**2/(8 lam**3) + O(delta**4) for delta <= 1e-5 lam
        delta_sq = 8 * lam**3 * (half_period_target - floor) / math.pi
        K = (lam * lam - delta_sq) / (2 * lam)
        if period.is_degenerate(params, K):
            # target so close to the floor that eta cannot be evaluated; use the model error
            return K, delta_sq**2 / lam**5 + 4 * np.finfo(float).eps * floor
    else:
        if excess(_Z_FLOOR) < 0:
            raise UnderflowError(
                f"half period {half_period_target!r} needs K below {_K_from_z(lam, _Z_FLOOR):.3g}"
            )
        z = brentq(excess, _Z_NEAR_DEGENERATE, _Z_FLOOR, xtol=1e-13, rtol=4 * np.finfo(float).eps)
        K = _K_from_z(lam, z)
    value, qerr = period.eta(params, K, tol=quad_tol)
    err = abs(value - half_period_target) + qerr
    if err > budget:
        raise ToleranceError(f"solve_K missed its budget: err={err:.3g} > {budget:.3g}")
    return K, err


def volume_with_error(params: ModelParams, K: float, k: int) -> tuple[float, float]:
    if K == params.lam / 2:
        return params.constant_volume, 0.0
    integral, err = period.volume_integral(params, K)
    scale = 4 * math.pi * k
    return scale * integral, scale * err


def volume(params: ModelParams, K: float, k: int) -> float:
    """Volume of the conformal metric ``f**2 g`` on the torus for the k-winding branch.

    ``K = lam/2`` denotes the constant branch and returns ``4 pi**2 lam**2 ell``.
    """
    period._check_K(params, K)
    if K == params.lam / 2:
        return params.constant_volume
    if k < 1:
        raise DomainError("winding number k must be >= 1 for a non-constant branch")
    return volume_with_error(params, K, k)[0]


class _PhaseInverter:
    """Inverse of ``Theta(theta) = int_0^theta 2 dphi / sqrt(Q(s_phi))`` on [0, pi/2]."""

    def __init__(self, params: ModelParams, K: float):
        self.lam = params.lam
        self.K = K
        self.s0, self.s1, self.delta = period.branch_geometry(params, K)
        edges = period.panel_edges(params, K)
        fine = [edges[0]]
        for a, b in zip(edges[:-1], edges[1:]):
            pieces = max(1, math.ceil((b - a) / _MAX_PANEL))
            fine.extend(np.linspace(a, b, pieces + 1)[1:])
        self.edges = np.asarray(fine)
        x, w = period.gauss_legendre(_INNER_ORDER)
        a = self.edges[:-1, None]
        half = 0.5 * np.diff(self.edges)[:, None]
        pieces = np.sum(half * w * self._rate_inv(a + half * (x + 1)), axis=1)
        self.cumulative = np.concatenate([[0.0], np.cumsum(pieces)])

    def s(self, theta):
        return self.s0 + 2 * self.delta * np.sin(theta) ** 2

    def q(self, theta):
        s = self.s(theta)
        return s * (s + 2 * self.lam) + 2 * self.lam * self.K

    def _rate_inv(self, theta):
        return 2.0 / np.sqrt(self.q(theta))

    @property
    def half_period(self) -> float:
        return float(self.cumulative[-1])

    def forward(self, theta: np.ndarray, panel: np.ndarray) -> np.ndarray:
        x, w = period.gauss_legendre(_INNER_ORDER)
        a = self.edges[panel]
        half = 0.5 * (theta - a)
        nodes = a[:, None] + half[:, None] * (x + 1)
        return self.cumulative[panel] + np.sum(half[:, None] * w * self._rate_inv(nodes), axis=1)

    def invert(self, tau: np.ndarray) -> np.ndarray:
        """theta in [0, pi/2] with Theta(theta) = tau, for tau in [0, half_period]."""
        tau = np.clip(tau, 0.0, self.half_period)
        panel = np.clip(np.searchsorted(self.cumulative, tau, side="right") - 1, 0, len(self.edges) - 2)
        lo = self.edges[panel].copy()
        hi = self.edges[panel + 1].copy()
        c_lo = self.cumulative[panel]
        c_hi = self.cumulative[panel + 1]
        theta = lo + (hi - lo) * (tau - c_lo) / np.where(c_hi > c_lo, c_hi - c_lo, 1.0)
        for _ in range(60):
            resid = self.forward(theta, panel) - tau
            lo = np.where(resid < 0, theta, lo)
            hi = np.where(resid > 0, theta, hi)
            step = resid * np.sqrt(self.q(theta)) / 2
            new = theta - step
            outside = (new < lo) | (new > hi)
            new = np.where(outside, 0.5 * (lo + hi), new)
            eps = np.finfo(float).eps
            # residual at the rounding level of tau itself counts as converged
            settled = np.abs(resid) <= 8 * eps * np.maximum(1.0, tau)
            new = np.where(settled, theta, new)
            done = np.max(np.abs(new - theta)) <= 4 * eps * max(1.0, np.max(np.abs(theta)))
            theta = new
            if done:
                break
        else:
            raise ToleranceError("phase inversion did not converge")
        return theta


def spectral_derivative(values: np.ndarray, length: float) -> np.ndarray:
    """Derivative of periodic samples on a uniform grid over ``[0, length)``."""
    n = values.shape[-1]
    wavenumbers = 2 * np.pi * np.fft.fftfreq(n, d=length / n)
    if n % 2 == 0:
        wavenumbers[n // 2] = 0.0
    spectrum = np.fft.fft(values, axis=-1) * (1j * wavenumbers)
    out = np.fft.ifft(spectrum, axis=-1)
    return out.real if np.isrealobj(values) else out


def reduced_residual(params: ModelParams, u: np.ndarray, v: np.ndarray) -> float:
    """Sup norm of the residual of ``u' + lam u = f v`` and ``-v' + lam v = f u``."""
    lam = params.lam
    f = 2 * (u**2 + v**2)
    du = spectral_derivative(u, params.period_length)
    dv = spectral_derivative(v, params.period_length)
    r1 = du + lam * u - f * v
    r2 = -dv + lam * v - f * u
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def dirac_residual(params: ModelParams, psi1: np.ndarray, psi2: np.ndarray) -> float:
    """Sup norm of the residual of the complex two-component system on the grid."""
    lam = params.lam
    rho = np.abs(psi1) ** 2 + np.abs(psi2) ** 2
    d1 = spectral_derivative(psi1, params.period_length)
    d2 = spectral_derivative(psi2, params.period_length)
    r1 = 1j * d1 + 1j * lam * psi2 - rho * psi1
    r2 = -1j * d2 - 1j * lam * psi1 - rho * psi2
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def constant_solution(params: ModelParams, n_grid: int = 1024) -> TorusSolution:
    lam = params.lam
    t = params.period_length * np.arange(n_grid) / n_grid
    half = math.sqrt(lam) / 2
    return TorusSolution(
        params=params,
        K=params.constant_K,
        k=0,
        grid_t=t,
        f=np.full(n_grid, lam),
        g=np.zeros(n_grid),
        u=np.full(n_grid, half),
        v=np.full(n_grid, half),
        volume=params.constant_volume,
        residual_sup=reduced_residual(params, np.full(n_grid, half), np.full(n_grid, half)),
    )


def _check_grid(n_grid: int) -> None:
    if n_grid < 64 or n_grid & (n_grid - 1):
        raise DomainError(f"n_grid must be a power of two >= 64, got {n_grid}")


def reconstruct(params: ModelParams, K: float, k: int, n_grid: int = 1024) -> TorusSolution:
    """Sample the k-winding profile for the first-integral constant ``K``.

    Gauge: ``f(0) = s0`` and ``f`` increases on ``[0, eta_K(s1)]``.
    """
    _check_grid(n_grid)
    period._check_K(params, K)
    if period.is_degenerate(params, K):
        return constant_solution(params, n_grid)
    if k < 1:
        raise DomainError("winding number k must be >= 1 for a non-constant branch")
    lam = params.lam
    inv = _PhaseInverter(params, K)
    half = inv.half_period
    if abs(2 * k * half - params.period_length) > 1e-8 * params.period_length:
        raise DomainError(
            f"2k·η_K(s1) = {2 * k * half!r} does not match the circumference 2πℓ = {params.period_length!r}"
        )
    t = params.period_length * np.arange(n_grid) / n_grid
    # the period of f is exactly 2*pi*ell/k on this grid; avoid accumulating the small mismatch
    tau = np.mod(t, params.period_length / k) * (2 * half) / (params.period_length / k)
    rising = tau <= half
    theta = inv.invert(np.where(rising, tau, 2 * half - tau))
    theta = np.where(rising, theta, math.pi - theta)
    sin2 = np.sin(theta) ** 2
    f = inv.s0 + 2 * inv.delta * sin2
    q = inv.q(theta)
    # g = -f'/(2 lam) with f' = 2 delta sin(2 theta) * sqrt(Q)/2
    g = -inv.delta * np.sin(2 * theta) * np.sqrt(q) / (2 * lam)
    u = np.sqrt((f + g) / 4)
    v = np.sqrt((f - g) / 4)
    residual = reduced_residual(params, u, v)
    if residual > RESIDUAL_BUDGET:
        raise ToleranceError(
            f"profile residual {residual:.3g} exceeds {RESIDUAL_BUDGET:g}; increase n_grid"
        )
    return TorusSolution(
        params=params,
        K=K,
        k=k,
        grid_t=t,
        f=f,
        g=g,
        u=u,
        v=v,
        volume=volume(params, K, k),
        residual_sup=residual,
    )


def solve(params: ModelParams, k: int, n_grid: int = 1024) -> TorusSolution:
    """Solution with ``k`` fundamental periods on the circle; ``k = 0`` is the constant branch."""
    if k == 0:
        return constant_solution(params, n_grid)
    if k < 0:
        raise DomainError("winding number must be nonnegative")
    K, _ = solve_K(params, math.pi * params.ell / k)
    return reconstruct(params, K, k, n_grid)


def spinor_lift(solution: TorusSolution, theta: float = 0.0) -> SpinorField:
    """``psi1 = (u + i v) e^{i theta}``, ``psi2 = (u - i v) e^{i theta}``."""
    phase = np.exp(1j * theta)
    psi1 = (solution.u + 1j * solution.v) * phase
    psi2 = (solution.u - 1j * solution.v) * phase
    return SpinorField(solution=solution, theta=theta, psi1=psi1, psi2=psi2)


def validate(solution: TorusSolution, tol: float = 1e-8) -> list[str]:
    """Re-check the profile invariants; returns the list of violations (empty if none)."""
    p = solution.params
    lam = p.lam
    f, g, u, v = solution.f, solution.g, solution.u, solution.v
    problems = []
    if np.any(u <= 0) or np.any(v <= 0):
        problems.append("u, v must be positive")
    if np.max(np.abs(f - 2 * (u**2 + v**2))) > tol * max(1.0, np.max(f)):
        problems.append("f != 2(u^2 + v^2)")
    if np.max(np.abs(g - 2 * (u**2 - v**2))) > tol * max(1.0, np.max(f)):
        problems.append("g != 2(u^2 - v^2)")
    first_integral = g**2 + (f**2 / (2 * lam) + solution.K) ** 2 - f**2
    if np.max(np.abs(first_integral)) > tol * max(1.0, np.max(f) ** 2):
        problems.append("first integral not conserved")
    if solution.residual_sup > RESIDUAL_BUDGET:
        problems.append("ODE residual above budget")
    if reduced_residual(p, u, v) > max(RESIDUAL_BUDGET, 2 * solution.residual_sup):
        problems.append("stored residual_sup does not match the profile")
    if solution.is_constant:
        if np.max(np.abs(f - lam)) > tol or np.max(np.abs(g)) > tol:
            problems.append("constant branch must have f = lam and g = 0")
    else:
        s0, s1 = period.roots(p, solution.K)
        slack = tol * s1
        if np.min(f) < s0 - slack or np.max(f) > s1 + slack:
            problems.append("f leaves [s0, s1]")
        ref = volume(p, solution.K, solution.k)
        if abs(ref - solution.volume) > 1e-10 * ref:
            problems.append("stored volume does not match quadrature")
    return problems
