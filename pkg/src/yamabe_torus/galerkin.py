"""Fourier-Galerkin variational solver for the two-component torus system.

A state holds truncated Fourier coefficients ``c_j[n]``, ``|n| <= N``, of
``psi_j(t) = sum_n c_j[n] exp(i n t / ell)``. The linear operator acts on
mode ``n`` through the Hermitian block

    M_n = [[-n/ell, i lam], [-i lam, n/ell]],   eigenvalues +-omega_n,
    omega_n = sqrt((n/ell)**2 + lam**2),

so ``|A| = omega_n`` on every mode and the spectral projectors are
``(I +- M_n/omega_n)/2``. The functional is

    E(psi) = 1/2 Re<A psi, psi> - 1/4 int |psi|**4 dt

over one circumference ``2 pi ell``, with the quartic term evaluated exactly
on a grid of at least ``4(2N+1)`` points.

Ground states are found by minimizing ``J(u) = max_{t>0} E(t u + w(t u))``
over the unit sphere of the positive subspace, where ``w(u)`` maximizes
``E(u + .)`` over the negative subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BracketError, ConvergenceError, DomainError
from .params import ModelParams

INNER_TOL = 1e-11
RAY_INNER_TOL = 1e-13
ASCENT_BUDGET = 10_000
NEWTON_BUDGET = 60
DEFAULT_RESTARTS = 8
DEFAULT_MODES = 64


@dataclass(frozen=True, eq=False)
class FourierState:
    params: ModelParams
    N: int
    c1: np.ndarray = field(repr=False)
    c2: np.ndarray = field(repr=False)

    @classmethod
    def zeros(cls, params: ModelParams, N: int) -> "FourierState":
        z = np.zeros(2 * N + 1, dtype=complex)
        return cls(params, N, z, z.copy())

    @classmethod
    def from_coeffs(cls, params: ModelParams, coeffs: np.ndarray) -> "FourierState":
        coeffs = np.asarray(coeffs, dtype=complex)
        N = (coeffs.shape[1] - 1) // 2
        return cls(params, N, coeffs[0].copy(), coeffs[1].copy())

    @classmethod
    def from_grid(cls, params: ModelParams, N: int, psi1: np.ndarray, psi2: np.ndarray) -> "FourierState":
        """Truncated Fourier coefficients of samples on a uniform grid over ``[0, 2 pi ell)``."""
        n = len(psi1)
        if n < 2 * N + 1:
            raise DomainError("grid too coarse for the requested truncation")
        idx = np.arange(-N, N + 1) % n
        spec = np.fft.fft(np.vstack([psi1, psi2]), axis=1) / n
        return cls.from_coeffs(params, spec[:, idx])

    @property
    def coeffs(self) -> np.ndarray:
        return np.vstack([self.c1, self.c2])

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def _new(self, coeffs) -> "FourierState":
        return FourierState.from_coeffs(self.params, coeffs)

    def __add__(self, other: "FourierState") -> "FourierState":
        return self._new(self.coeffs + other.coeffs)

    def __sub__(self, other: "FourierState") -> "FourierState":
        return self._new(self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "FourierState":
        return self._new(self.coeffs * scalar)

    __rmul__ = __mul__

    def to_grid(self, n_grid: int | None = None):
        """``(t, psi1, psi2)`` on a uniform grid; default size is the dealiased ``4(2N+1)``."""
        n_grid = n_grid or 4 * (2 * self.N + 1)
        if n_grid < 2 * self.N + 1:
            raise DomainError("grid too coarse for the truncation")
        buf = np.zeros((2, n_grid), dtype=complex)
        buf[:, self.modes % n_grid] = self.coeffs
        psi = np.fft.ifft(buf, axis=1) * n_grid
        t = self.params.period_length * np.arange(n_grid) / n_grid
        return t, psi[0], psi[1]

    def l2_norm(self) -> float:
        return math.sqrt(self.params.period_length * float(np.sum(np.abs(self.coeffs) ** 2)))

    def h_norm(self) -> float:
        """Norm induced by ``|A|^(1/2)``."""
        return math.sqrt(_disc(self.params, self.N).hdot(self.coeffs, self.coeffs))

    def shifted(self, c: float) -> "FourierState":
        """Translate ``psi(t) -> psi(t + c)``."""
        return self._new(self.coeffs * np.exp(1j * self.modes * c / self.params.ell))


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    params: ModelParams
    N: int
    modes: np.ndarray
    blocks: np.ndarray  # (2N+1, 2, 2)
    omega: np.ndarray
    plus_vectors: np.ndarray  # (2N+1, 2), unit positive eigenvectors
    minus_vectors: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.concatenate([-self.omega, self.omega])

    @property
    def gap(self) -> float:
        return float(np.min(self.omega))


@dataclass(frozen=True)
class RunRecord:
    label: str
    energy: float
    gradient_norm: float
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class GalerkinResult:
    state: FourierState
    energy: float
    gradient_norm: float
    nehari_residual: float
    restarts_used: int
    runs: list[RunRecord] = field(default_factory=list)


class _Discretization:
    def __init__(self, params: ModelParams, N: int):
        if N < 1:
            raise DomainError("truncation N must be positive")
        self.params = params
        self.N = N
        self.lam = params.lam
        self.L = params.period_length
        self.modes = np.arange(-N, N + 1)
        self.M = 4 * (2 * N + 1)
        self.idx = self.modes % self.M
        self.k = self.modes / params.ell
        self.omega = np.sqrt(self.k**2 + self.lam**2)

    def to_grid(self, C):
        buf = np.zeros((2, self.M), dtype=complex)
        buf[:, self.idx] = C
        return np.fft.ifft(buf, axis=1) * self.M

    def from_grid(self, G):
        return np.fft.fft(G, axis=1)[:, self.idx] / self.M

    def apply_A(self, C):
        c1, c2 = C
        return np.stack([-self.k * c1 + 1j * self.lam * c2, -1j * self.lam * c1 + self.k * c2])

    def plus(self, C):
        return 0.5 * (C + self.apply_A(C) / self.omega)

    def minus(self, C):
        return 0.5 * (C - self.apply_A(C) / self.omega)

    def l2(self, X, Y) -> float:
        return self.L * float(np.sum((X.conj() * Y).real))

    def hdot(self, X, Y) -> float:
        return self.L * float(np.sum(self.omega * (X.conj() * Y).real))

    def hnorm(self, X) -> float:
        return math.sqrt(max(self.hdot(X, X), 0.0))

    def dual_norm(self, X) -> float:
        """Norm of the functional ``h -> l2(X, h)`` measured against the H norm."""
        return math.sqrt(self.L * float(np.sum(np.abs(X) ** 2 / self.omega)))

    def density(self, C):
        psi = self.to_grid(C)
        rho = (psi.real**2 + psi.imag**2).sum(axis=0)
        return psi, rho

    def quartic(self, rho) -> float:
        return self.L / self.M * float(np.sum(rho**2))

    def cubic(self, psi, rho):
        return self.from_grid(rho * psi)

    def cubic_derivative(self, psi, rho, H):
        h = self.to_grid(H)
        r = (psi.conj() * h).real.sum(axis=0)
        return self.from_grid(rho * h + 2 * r * psi)

    def energy(self, C) -> float:
        _, rho = self.density(C)
        return 0.5 * self.l2(self.apply_A(C), C) - 0.25 * self.quartic(rho)

    def gradient(self, C):
        psi, rho = self.density(C)
        return self.apply_A(C) - self.cubic(psi, rho)


@lru_cache(maxsize=32)
def _disc(params: ModelParams, N: int) -> _Discretization:
    return _Discretization(params, N)


# -- linear structure -----------------------------------------------------------


def spectral_split(params: ModelParams, N: int) -> SpectralSplit:
    """Per-mode blocks of the linear operator with their closed-form eigenpairs."""
    d = _disc(params, N)
    lam = params.lam
    blocks = np.zeros((2 * N + 1, 2, 2), dtype=complex)
    blocks[:, 0, 0] = -d.k
    blocks[:, 0, 1] = 1j * lam
    blocks[:, 1, 0] = -1j * lam
    blocks[:, 1, 1] = d.k
    # (lam, -i(k + omega)) and (lam, i(omega - k)), with omega - k = lam**2/(omega + k) for k > 0
    kp = d.k + d.omega
    km = np.where(d.k > 0, lam**2 / (d.omega + d.k), d.omega - d.k)
    plus = np.stack([np.full_like(d.k, lam, dtype=complex), -1j * kp], axis=1)
    minus = np.stack([np.full_like(d.k, lam, dtype=complex), 1j * km], axis=1)
    plus /= np.linalg.norm(plus, axis=1, keepdims=True)
    minus /= np.linalg.norm(minus, axis=1, keepdims=True)
    return SpectralSplit(params, N, d.modes.copy(), blocks, d.omega.copy(), plus, minus)


def apply_operator(state: FourierState) -> FourierState:
    """Linear part of the system, ``(i psi1' + i lam psi2, -i psi2' - i lam psi1)``, mode by mode."""
    return state._new(_disc(state.params, state.N).apply_A(state.coeffs))


def split(state: FourierState) -> tuple[FourierState, FourierState]:
    """Components in the positive and negative spectral subspaces."""
    d = _disc(state.params, state.N)
    C = state.coeffs
    plus = d.plus(C)
    return state._new(plus), state._new(C - plus)


def energy(state: FourierState) -> float:
    return _disc(state.params, state.N).energy(state.coeffs)


def energy_gradient(state: FourierState) -> FourierState:
    """Coefficients ``G`` with ``E'(psi)[h] = 2 pi ell Re sum conj(G) h``."""
    return state._new(_disc(state.params, state.N).gradient(state.coeffs))


def energy_derivative(state: FourierState, direction: FourierState) -> float:
    d = _disc(state.params, state.N)
    return d.l2(d.gradient(state.coeffs), direction.coeffs)


def quartic_integral(state: FourierState) -> float:
    d = _disc(state.params, state.N)
    return d.quartic(d.density(state.coeffs)[1])


def gradient_dual_norm(state: FourierState) -> float:
    d = _disc(state.params, state.N)
    return d.dual_norm(d.gradient(state.coeffs))


# -- reduction to the positive subspace ------------------------------------------


def _cg(apply, rhs, dot, tol, max_iter):
    x = np.zeros_like(rhs)
    r = rhs.copy()
    p = r.copy()
    rr = dot(r, r)
    for _ in range(max_iter):
        if math.sqrt(rr) <= tol:
            break
        Ap = apply(p)
        alpha = rr / dot(p, Ap)
        x += alpha * p
        r -= alpha * Ap
        rr_new = dot(r, r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x


def _reduce(d: _Discretization, U, W=None, tol=INNER_TOL, method="newton"):
    """Maximizer W of E(U + .) over the negative subspace; returns ``(W, psi, rho, iterations)``."""
    W = np.zeros_like(U) if W is None else d.minus(W)
    budget = NEWTON_BUDGET if method == "newton" else ASCENT_BUDGET
    scale = max(d.hnorm(U), 1.0e-300)
    target = tol * min(1.0, scale)
    for it in range(budget + 1):
        psi, rho = d.density(U + W)
        G = W + d.minus(d.cubic(psi, rho)) / d.omega
        gnorm = d.hnorm(G)
        if gnorm <= target:
            return W, psi, rho, it
        if it == budget:
            break
        if method == "newton":

            def hess(X, psi=psi, rho=rho):
                return X + d.minus(d.cubic_derivative(psi, rho, X)) / d.omega

            forcing = min(0.1, gnorm)
            step = _cg(hess, -G, d.hdot, max(forcing * gnorm, 0.1 * target), 200)
            W = W + step
        elif method == "ascent":
            alpha = 1.0 / (1.0 + 3.0 * float(np.max(rho)) / d.lam)
            W = W - alpha * G
        else:
            raise ValueError(f"unknown method {method!r}")
    raise ConvergenceError(f"reduction map did not converge ({method}, residual {gnorm:.3g})")


def reduction_map(u_plus: FourierState, method: str = "newton", tol: float = INNER_TOL) -> FourierState:
    """Unique maximizer ``w*`` of ``w -> E(u + w)`` over the negative subspace.

    ``method="ascent"`` runs damped gradient ascent with step
    ``1/(1 + 3 max|psi|**2 / lam)`` in the ``|A|`` metric; ``"newton"`` uses
    Newton steps with conjugate-gradient solves. Both stop once the gradient
    falls below ``tol`` (relative to ``||u||`` when that is below one).
    """
    d = _disc(u_plus.params, u_plus.N)
    W, *_ = _reduce(d, d.plus(u_plus.coeffs), tol=tol, method=method)
    return u_plus._new(W)


class _Ray:
    """``phi(t) = E(t u + w(t u))`` along a unit direction ``u`` of the positive subspace."""

    def __init__(self, d: _Discretization, U, W_hint=None, t_hint=None):
        self.d = d
        self.U = U
        self.cache = (t_hint, W_hint)

    def solve_inner(self, t):
        t_prev, W_prev = self.cache
        W0 = None if W_prev is None or not t_prev else W_prev * (t / t_prev) ** 3
        W, psi, rho, _ = _reduce(self.d, t * self.U, W0, tol=RAY_INNER_TOL)
        self.cache = (t, W)
        return W, psi, rho

    def slope(self, t) -> float:
        W, psi, rho = self.solve_inner(t)
        return t - self.d.l2(self.d.cubic(psi, rho), self.U)

    def value(self, t) -> float:
        W, psi, rho = self.solve_inner(t)
        d = self.d
        C = t * self.U + W
        return 0.5 * d.l2(d.apply_A(C), C) - 0.25 * d.quartic(rho)

    def maximize(self, t_guess=None, t_min=1e-6, t_max=1e6):
        """``(t*, W, psi, rho)`` from a bracketed root of the slope."""
        d = self.d
        if t_guess is None:
            _, rho = d.density(self.U)
            t_guess = 1.0 / math.sqrt(d.quartic(rho))
        t = min(max(t_guess, t_min), t_max)
        s = self.slope(t)
        factor = 1.25
        if s > 0:
            lo, hi = t, None
            while hi is None:
                t *= factor
                if t > t_max:
                    raise BracketError("ray profile still increasing at the bracket end")
                if self.slope(t) <= 0:
                    hi = t
                else:
                    lo = t
                factor = min(factor * 1.5, 4.0)
        else:
            lo, hi = None, t
            while lo is None:
                t /= factor
                if t < t_min:
                    raise BracketError("ray profile decreasing at the bracket start")
                if self.slope(t) > 0:
                    lo = t
                else:
                    hi = t
                factor = min(factor * 1.5, 4.0)
        try:
            t_star = brentq(self.slope, lo, hi, xtol=1e-15 * hi, rtol=8 * np.finfo(float).eps)
        except ValueError:
            # the slope at a bracket end re-evaluated at noise level flipped sign
            t_star = min((lo, hi), key=lambda x: abs(self.slope(x)))
        W, psi, rho = self.solve_inner(t_star)
        return t_star, W, psi, rho


def nehari_scale(u_plus: FourierState) -> float:
    """The unique ``t* > 0`` maximizing ``t -> E(t u + w(t u))``."""
    d = _disc(u_plus.params, u_plus.N)
    U = d.plus(u_plus.coeffs)
    norm = d.hnorm(U)
    if norm == 0:
        raise DomainError("direction must be nonzero")
    t_star, *_ = _Ray(d, U / norm).maximize()
    return t_star / norm


def ray_profile(u_plus: FourierState, ts) -> np.ndarray:
    """``E(t u + w(t u))`` sampled at the given ``t`` values (``u`` used as given)."""
    d = _disc(u_plus.params, u_plus.N)
    ray = _Ray(d, d.plus(u_plus.coeffs))
    return np.array([ray.value(float(t)) for t in ts])


def nehari_point(u_plus: FourierState) -> FourierState:
    """Critical point candidate ``t* u + w(t* u)`` on the ray through ``u``."""
    d = _disc(u_plus.params, u_plus.N)
    U = d.plus(u_plus.coeffs)
    norm = d.hnorm(U)
    t_star, W, *_ = _Ray(d, U / norm).maximize()
    return u_plus._new(t_star * U / norm + W)


# -- outer minimization -------------------------------------------------------------


def _descend(d: _Discretization, U0, tol: float, max_iter: int):
    """Projected gradient descent of J on the unit sphere of the positive subspace."""
    U = d.plus(U0)
    U = U / d.hnorm(U)
    ray = _Ray(d, U)
    t, W, psi, rho = ray.maximize()

    def evaluate(U, t, W, psi, rho):
        C = t * U + W
        full = d.apply_A(C) - d.cubic(psi, rho)
        J = 0.5 * d.l2(d.apply_A(C), C) - 0.25 * d.quartic(rho)
        grad = t * d.plus(full) / d.omega
        grad -= d.hdot(grad, U) * U
        return C, full, J, grad

    C, full, J, grad = evaluate(U, t, W, psi, rho)
    step = 0.5 / max(t * t, 1e-12)
    prev = None
    for it in range(max_iter):
        gnorm = d.dual_norm(full)
        if gnorm <= tol * max(abs(J), 1e-300):
            return C, J, gnorm, it, True
        if prev is not None:
            dU, dG = U - prev[0], grad - prev[1]
            denom = d.hdot(dU, dG)
            if denom > 0:
                step = min(max(d.hdot(dU, dU) / denom, 1e-8), 1e8)
        g2 = d.hdot(grad, grad)
        for _ in range(40):
            trial = U - step * grad
            trial = trial / d.hnorm(trial)
            ray_trial = _Ray(d, trial, W, t)
            try:
                t_new, W_new, psi_new, rho_new = ray_trial.maximize(t)
            except (BracketError, ConvergenceError):
                step *= 0.5
                continue
            C_new, full_new, J_new, grad_new = evaluate(trial, t_new, W_new, psi_new, rho_new)
            if J_new <= J - 1e-4 * step * g2 + 1e-15 * abs(J):
                break
            step *= 0.5
        else:
            return C, J, gnorm, it, False
        prev = (U, grad)
        U, t, W = trial, t_new, W_new
        C, full, J, grad = C_new, full_new, J_new, grad_new
    return C, J, d.dual_norm(full), max_iter, False


def constant_state(params: ModelParams, N: int) -> FourierState:
    """Constant-length solution ``psi1 = (1+i) sqrt(lam)/2``, ``psi2 = (1-i) sqrt(lam)/2``."""
    state = FourierState.zeros(params, N)
    a = math.sqrt(params.lam) / 2
    state.c1[N] = a * (1 + 1j)
    state.c2[N] = a * (1 - 1j)
    return state


def torus_import(params: ModelParams, N: int, k: int = 1, n_grid: int = 1024) -> FourierState:
    """Truncated Fourier image of the quadrature-based k-winding solution."""
    from . import solver

    sol = solver.solve(params, k, n_grid)
    field_ = solver.spinor_lift(sol)
    return FourierState.from_grid(params, N, field_.psi1, field_.psi2)


def random_direction(params: ModelParams, N: int, rng: np.random.Generator) -> FourierState:
    d = _disc(params, N)
    amp = np.exp(-0.5 * np.abs(d.k))
    C = (rng.standard_normal((2, 2 * N + 1)) + 1j * rng.standard_normal((2, 2 * N + 1))) * amp
    C = d.plus(C)
    return FourierState.from_coeffs(params, C / d.hnorm(C))


def minimize(
    params: ModelParams,
    N: int = DEFAULT_MODES,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    warm_starts: bool = True,
    tol: float = 1e-9,
    max_iter: int = 3000,
) -> GalerkinResult:
    """Least-energy critical point over the Nehari set.

    Runs ``restarts`` seeded random directions plus, when ``warm_starts`` is
    set, the constant solution and (for ``ell > 1/(2 lam)``) the single-winding
    quadrature solution. Deterministic for a given seed.
    """
    if N < 16:
        raise DomainError("N must be at least 16")
    if restarts < 1:
        raise DomainError("restarts must be at least 1")
    d = _disc(params, N)
    starts: list[tuple[str, np.ndarray]] = []
    for i in range(restarts):
        rng = np.random.default_rng([seed, i])
        starts.append((f"random-{i}", random_direction(params, N, rng).coeffs))
    if warm_starts:
        starts.append(("constant", constant_state(params, N).coeffs))
        if params.ell > params.first_branch_point:
            try:
                starts.append(("torus-k1", torus_import(params, N).coeffs))
            except Exception:  # import is optional; failures only lose a warm start
                pass

    from ._parallel import ordered_map

    def run(item):
        label, C0 = item
        try:
            C, J, gnorm, iters, ok = _descend(d, C0, tol, max_iter)
        except (ConvergenceError, BracketError):
            return label, None, RunRecord(label, math.nan, math.inf, 0, False)
        return label, C, RunRecord(label, J, gnorm, iters, ok)

    outcomes = ordered_map(run, starts)
    runs = [rec for _, _, rec in outcomes]
    converged = [(rec.energy, C) for _, C, rec in outcomes if rec.converged]
    if not converged:
        raise ConvergenceError("no start converged")
    J, C = min(converged, key=lambda pair: pair[0])
    state = FourierState.from_coeffs(params, C)
    full = d.gradient(C)
    return GalerkinResult(
        state=state,
        energy=J,
        gradient_norm=d.dual_norm(full),
        nehari_residual=abs(d.l2(full, d.plus(C))),
        restarts_used=len(starts),
        runs=runs,
    )


# -- gauge handling -----------------------------------------------------------------


def phase_normalized(state: FourierState) -> FourierState:
    """Rotate the global phase so the largest coefficient is real positive."""
    C = state.coeffs
    j = np.unravel_index(np.argmax(np.abs(C)), C.shape)
    return state * np.exp(-1j * np.angle(C[j]))


def align_translation(state: FourierState, density: np.ndarray) -> float:
    """Shift ``c`` maximizing the correlation of ``|psi(t + c)|**2`` with ``density``.

    ``density`` is sampled on the uniform grid over ``[0, 2 pi ell)``.
    """
    ell = state.params.ell
    n = len(density)
    _, p1, p2 = state.to_grid(max(n, 4 * (2 * state.N + 1)))
    rho_hat = np.fft.fft(np.abs(p1) ** 2 + np.abs(p2) ** 2)
    m = len(rho_hat)
    ref_hat = np.fft.fft(density)
    modes = np.fft.fftfreq(m, 1.0 / m).astype(int)
    keep = np.abs(modes) < min(n, m) // 2
    a = rho_hat[keep] / m
    b = ref_hat[modes[keep] % n] / n
    w = modes[keep] / ell

    def corr(c):
        return float(np.sum(a * np.conj(b) * np.exp(1j * w * c)).real)

    L = state.params.period_length
    coarse = np.linspace(0.0, L, 512, endpoint=False)
    values = [corr(c) for c in coarse]
    c0 = coarse[int(np.argmax(values))]
    h = L / 512
    res = minimize_scalar(lambda c: -corr(c), bounds=(c0 - h, c0 + h), method="bounded", options={"xatol": 1e-13})
    return float(res.x) % L


def aligned_modulus(state: FourierState, density: np.ndarray) -> np.ndarray:
    """``|psi|`` translated to best match ``density`` and sampled on its grid."""
    c = align_translation(state, density)
    _, p1, p2 = state.shifted(c).to_grid(len(density))
    return np.sqrt(np.abs(p1) ** 2 + np.abs(p2) ** 2)
