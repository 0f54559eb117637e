"""Density of real eigenvalues: exact finite N, almost-Hermitian limit, references.

At finite N the one-point function is ``R1 + R2`` with

    R1(x) = sqrt(N/2pi) * sum_{k<=N-2} psi_k(x)^2
    R2(x) = N sqrt(N-1) / ((1+tau) sqrt(2pi)) * psi_{N-1}(x) * int_0^x psi_{N-2}

where ``psi_k(x) = sqrt((tau/2)^k/k!) H_k(sqrt(N/(2tau)) x) exp(-N x^2/(2(1+tau)))``
is generated by a log-scaled recurrence, and ``rho = (R1 + R2) / E_N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from . import _hermite
from .expected import c_alpha, expected_exact
from .quadrature import gauss_kronrod
from .specfun import hyp2f1_regularized, log_gamma

__all__ = [
    "DensityCurve",
    "density_exact",
    "density_parts",
    "density_at_zero_closed",
    "density_rho1_integral",
    "density_limit_ah",
    "density_semicircle",
    "density_uniform_elliptic",
    "in_ellipse",
    "cd_residual",
    "density_curve",
    "default_grid",
]

MAX_N = 2048


@dataclass
class DensityCurve:
    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values must have the same shape")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly ascending")
        if np.any(self.values < 0):
            raise ValueError("density values must be nonnegative")

    def integral(self) -> float:
        trap = getattr(np, "trapezoid", None) or np.trapz
        return float(trap(self.values, self.grid))

    def to_csv(self) -> str:
        route = self.meta.get("route", "")
        lines = ["x,rho,route"]
        lines += [f"{x:.17g},{v:.17g},{route}" for x, v in zip(self.grid, self.values)]
        return "\n".join(lines) + "\n"


def default_grid(lo: float = -2.5, hi: float = 2.5, n: int = 401) -> np.ndarray:
    return np.linspace(lo, hi, n)


def _check(N: int, tau: float) -> None:
    if not isinstance(N, (int, np.integer)) or N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2, got {N!r}")
    if N > MAX_N:
        raise ValueError(f"N must be <= {MAX_N}")
    if not 0 <= tau < 1:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")


def _psi(N: int, tau: float, x, k: int, sumsq_upto: int | None = None) -> _hermite.HermiteRun:
    x = np.asarray(x, dtype=float)
    return _hermite.run(math.sqrt(N) * x, k, tau, log0=-N * x * x / (2 * (1 + tau)), sumsq_upto=sumsq_upto)


def _psi_value(N: int, tau: float, k: int):
    def f(x):
        return _psi(N, tau, x, k).value()

    return f


def _cumulative_integral(f, x: np.ndarray, abstol: float = 1e-12, odd: bool = False) -> np.ndarray:
    """``int_0^x f`` for every entry of ``x``; ``f`` must be even, or odd if ``odd``."""
    ax = np.abs(x).ravel()
    order = np.argsort(ax)
    pts = np.concatenate([[0.0], ax[order]])
    pieces = gauss_kronrod(f, pts[:-1], pts[1:], abstol=abstol, reltol=1e-12)
    cum = np.empty_like(ax)
    cum[order] = np.cumsum(pieces)
    if odd:
        return cum.reshape(np.shape(x))
    return (np.sign(x).ravel() * cum).reshape(np.shape(x))


def density_parts(N: int, tau: float, x) -> tuple[np.ndarray, np.ndarray, float]:
    """``(R1(x), R2(x), E_N)``."""
    _check(N, tau)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = _psi(N, tau, x, N - 1, sumsq_upto=N - 2)
    with np.errstate(under="ignore"):
        r1 = math.sqrt(N / (2 * math.pi)) * np.exp(r.log_sumsq())
    last = r.value()
    integral = _cumulative_integral(_psi_value(N, tau, N - 2), x)
    r2 = N * math.sqrt(N - 1) / ((1 + tau) * math.sqrt(2 * math.pi)) * last * integral
    return r1, r2, expected_exact(N, tau)


def density_exact(N: int, tau: float, x) -> np.ndarray:
    """Exact density of real eigenvalues at finite even ``N``; tiny negatives are clipped."""
    r1, r2, e = density_parts(N, tau, x)
    rho = (r1 + r2) / e
    rho[(rho < 0) & (rho >= -1e-12)] = 0.0
    return rho


def density_at_zero_closed(N: int, tau: float) -> float:
    """Hypergeometric closed form of ``rho_N(0)``."""
    _check(N, tau)
    e = expected_exact(N, tau)
    first = 1.0 / math.sqrt(1.0 - tau * tau)
    if tau == 0:
        second = 0.0
    else:
        f = hyp2f1_regularized(1.0, (N + 1) / 2, N / 2 + 1, tau * tau, max_terms=5_000_000)
        log_pre = N * math.log(tau) + log_gamma((N + 1) / 2).log_mag - 0.5 * math.log(math.pi)
        second = math.exp(log_pre + f.log_mag) * f.sign
    return math.sqrt(N / (2 * math.pi)) * (first - second) / e


def density_rho1_integral(N: int, tau: float, x) -> np.ndarray:
    """``rho_N^1`` from its value at 0 and the integral of ``psi_{N-2} psi_{N-1}``."""
    _check(N, tau)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r1_0, _, e = density_parts(N, tau, np.array([0.0]))

    def prod(u):
        r = _psi(N, tau, u, N - 1)
        with np.errstate(under="ignore", over="ignore"):
            return r.prev * r.last * np.exp(2 * r.log_scale)

    integral = _cumulative_integral(prod, x, odd=True)
    coef = math.sqrt(2 / math.pi) * N * math.sqrt(N - 1) / (1 + tau)
    return (r1_0[0] - coef * integral) / e


def density_limit_ah(alpha: float, x) -> np.ndarray:
    """Limiting density of real eigenvalues in the almost-Hermitian regime."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) <= 2
    root = np.sqrt(np.clip(4 - x * x, 0, None))
    val = sp.erf(0.5 * alpha * root) / (c_alpha(alpha) * 2 * alpha * math.sqrt(math.pi))
    return np.where(inside, val, 0.0)


def density_semicircle(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 2, np.sqrt(np.clip(4 - x * x, 0, None)) / (2 * math.pi), 0.0)


def density_uniform_elliptic(tau: float, x) -> np.ndarray:
    """Uniform density on ``[-(1+tau), 1+tau]``: the elliptic law seen on the real line."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1 + tau, 1.0 / (2 * (1 + tau)), 0.0)


def in_ellipse(z, tau: float, inflate: float = 0.0) -> np.ndarray:
    """Membership of complex points in the elliptic-law support, optionally inflated."""
    z = np.asarray(z)
    s = 1.0 + inflate
    return (z.real / ((1 + tau) * s)) ** 2 + (z.imag / ((1 - tau) * s)) ** 2 <= 1.0


def _cd_terms(N: int, tau: float, x):
    # h_k = sqrt((tau/2)^k/k!) H_k(x) is the recurrence at z = x*sqrt(2 tau)
    r = _hermite.run(np.asarray(x, dtype=float) * math.sqrt(2 * tau), N - 1, tau, sumsq_upto=N - 2)
    return r


def cd_residual(N: int, tau: float, x: float) -> float:
    """Christoffel-Darboux residual for ``F_N = sum_{k<=N-2} (tau/2)^k/k! H_k(x)^2``.

    Returns ``|F_N' - RHS| / F_N`` with ``F_N'`` from a central difference;
    dividing by ``F_N`` keeps the check finite where ``F_N`` overflows.
    """
    if N < 2 or N % 2 or N > 512:
        raise ValueError("N must be even with 2 <= N <= 512")
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    h = 1e-6 * max(1.0, abs(x))
    pts = np.array([x - h, x, x + h])
    r = _cd_terms(N, tau, pts)
    log_f = r.log_sumsq()
    # F(x±h)/F(x)
    ratio = np.exp(log_f - log_f[1])
    lhs = (ratio[2] - ratio[0]) / (2 * h)
    w = tau / 2
    cross = r.prev[1] * r.last[1] / r.sumsq[1]
    rhs = 4 * tau * x / (1 + tau) - 4 * math.sqrt(w * (N - 1)) / (1 + tau) * cross
    return abs(lhs - rhs)


def cd_rhs(N: int, tau: float, x: float) -> float:
    """Right-hand side of the Christoffel-Darboux identity divided by ``F_N``."""
    r = _cd_terms(N, tau, np.array([x]))
    cross = r.prev[0] * r.last[0] / r.sumsq[0]
    return 4 * tau * x / (1 + tau) - 4 * math.sqrt(tau / 2 * (N - 1)) / (1 + tau) * cross


def density_curve(
    N: int | None = None,
    tau: float | None = None,
    alpha: float | None = None,
    grid=None,
    route: str = "exact",
) -> DensityCurve:
    """Density on a grid. ``route`` is ``"exact"`` (needs N) or ``"limit"`` (needs alpha)."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    if route == "limit":
        if tau == 1:
            return DensityCurve(grid, density_semicircle(grid), {"tau": 1.0, "route": "limit"})
        if alpha is None:
            raise ValueError("the limit route needs alpha")
        return DensityCurve(grid, density_limit_ah(alpha, grid), {"alpha": alpha, "route": "limit"})
    if route != "exact":
        raise ValueError(f"unknown route {route!r}")
    if N is None:
        raise ValueError("the exact route needs N")
    if tau is None:
        if alpha is None:
            raise ValueError("give tau or alpha")
        tau = 1 - alpha * alpha / N
    if tau == 1:
        return DensityCurve(grid, density_semicircle(grid), {"N": N, "tau": 1.0, "route": "limit"})
    meta = {"N": N, "tau": tau, "route": "exact"}
    if alpha is not None:
        meta["alpha"] = alpha
    return DensityCurve(grid, density_exact(N, tau, grid), meta)
