"""Variance of the number of real eigenvalues.

In kernel variables the Hermite functions are
``phi_k(x) = sqrt((tau/2)^k/k!) H_k(x/sqrt(2 tau)) exp(-x^2/(2(1+tau)))`` and

    S1(x, y) = sum_{k<=N-2} phi_k(x) phi_k(y) / sqrt(2 pi)
    S2(x, y) = kappa * phi_{N-1}(y) * Phi(x),   Phi(x) = int_0^x phi_{N-2}

with ``kappa = sqrt(N-1) / ((1+tau) sqrt(2 pi))``.  Because both pieces are
finite sums of products, ``int int S(x,y) S(y,x)`` reduces to one-dimensional
integrals ``G_jk = int phi_j phi_k`` and ``A_k = int phi_k Phi``:

    (1/2pi) sum G_jk^2 + 2 kappa/sqrt(2pi) sum_k G_{k,N-1} A_k + kappa^2 A_{N-1}^2

and ``V = 2E - 2 * that``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from . import _hermite, series
from .expected import c_alpha, expected_exact
from .quadrature import composite_gauss_legendre, gauss_kronrod
from .specfun import ScaledReal, hyp2f1_scaled, log_gamma

__all__ = [
    "KernelEval",
    "VarianceResult",
    "variance_exact",
    "variance_details",
    "r_alpha",
    "kernel_double_sum",
    "a_coefficients",
    "comb_identity",
]

MAX_N = 256


def _check(N: int, tau: float) -> None:
    if not isinstance(N, (int, np.integer)) or N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2, got {N!r}")
    if not 0 <= tau < 1:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")


def _phi_table(N: int, tau: float, x: np.ndarray, kmax: int) -> np.ndarray:
    return _hermite.run(x, kmax, tau, log0=-x * x / (2 * (1 + tau)), keep_table=True).table


def _phi(N: int, tau: float, k: int):
    def f(x):
        return _hermite.run(x, k, tau, log0=-x * x / (2 * (1 + tau))).value()

    return f


def _cumulative(f, x: np.ndarray) -> np.ndarray:
    # int_0^x f for even f, x arbitrary
    ax = np.abs(x)
    order = np.argsort(ax)
    pts = np.concatenate([[0.0], ax[order]])
    pieces = gauss_kronrod(f, pts[:-1], pts[1:], abstol=1e-14, reltol=1e-13)
    cum = np.empty_like(ax)
    cum[order] = np.cumsum(pieces)
    return np.sign(x) * cum


class KernelEval:
    """Pointwise evaluators of the variance kernel at fixed ``(N, tau)``."""

    def __init__(self, N: int, tau: float):
        _check(N, tau)
        self.N = N
        self.tau = tau
        self.kappa = math.sqrt(N - 1) / ((1 + tau) * math.sqrt(2 * math.pi))

    def s1(self, x, y) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        tx = _phi_table(self.N, self.tau, x.ravel(), self.N - 2)
        ty = _phi_table(self.N, self.tau, y.ravel(), self.N - 2)
        return (np.sum(tx * ty, axis=0) / math.sqrt(2 * math.pi)).reshape(x.shape)

    def big_phi(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        return _cumulative(_phi(self.N, self.tau, self.N - 2), x.ravel()).reshape(x.shape)

    def s2(self, x, y) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        last = _phi(self.N, self.tau, self.N - 1)(y)
        return self.kappa * last * self.big_phi(x)

    def s(self, x, y) -> np.ndarray:
        return self.s1(x, y) + self.s2(x, y)


@dataclass
class VarianceResult:
    v: float
    e: float
    s1_term: float
    s2_term: float
    route: str
    panels: int = 0
    half_width: float = 0.0

    @property
    def ratio(self) -> float:
        return self.v / self.e


def _support_half_width(N: int, tau: float) -> float:
    L = 2 * math.sqrt(N) + 10
    for _ in range(40):
        edge = _phi_table(N, tau, np.array([L]), N - 1)[:, 0]
        if np.max(np.abs(edge)) < 1e-18:
            return L
        L *= 1.25
    raise RuntimeError("could not bracket the kernel support")


def _integrals(N: int, tau: float, panels: int, L: float):
    x, w = composite_gauss_legendre(-L, L, panels, order=20)
    table = _phi_table(N, tau, x, N - 1)  # rows k = 0..N-1
    gram = (table * w) @ table.T
    big_phi = _cumulative(_phi(N, tau, N - 2), x)
    a = table @ (w * big_phi)
    return gram, a


def _assemble(N: int, tau: float, gram: np.ndarray, a: np.ndarray):
    kappa = math.sqrt(N - 1) / ((1 + tau) * math.sqrt(2 * math.pi))
    g = gram[: N - 1, : N - 1]
    s1 = float(np.sum(g * g)) / (2 * math.pi)
    cross = 2 * kappa / math.sqrt(2 * math.pi) * float(gram[: N - 1, N - 1] @ a[: N - 1])
    s2 = cross + kappa * kappa * float(a[N - 1]) ** 2
    return s1, s2


def _quadrature_parts(N: int, tau: float, tol: float = 1e-9):
    L = _support_half_width(N, tau)
    panels = max(32, int(math.ceil(L * math.sqrt(N) / 4)))
    prev = None
    for _ in range(8):
        gram, a = _integrals(N, tau, panels, L)
        s1, s2 = _assemble(N, tau, gram, a)
        if prev is not None and abs(s1 + s2 - sum(prev)) <= tol * max(1.0, abs(s1 + s2)):
            return s1, s2, panels, L
        prev = (s1, s2)
        panels *= 2
    raise RuntimeError(f"variance quadrature did not settle; last change {abs(s1 + s2 - sum(prev)):.3g}")


def variance_details(N: int, tau: float, route: str = "quadrature") -> VarianceResult:
    """Variance with its ``S1 S1`` and ``S2``-involving contributions reported separately."""
    _check(N, tau)
    if route in ("quadrature", "sum") and N > MAX_N:
        raise ValueError(f"N must be <= {MAX_N} for the {route} route")
    e = expected_exact(N, tau)
    if route == "limit":
        alpha = math.sqrt(N * (1 - tau))
        return VarianceResult(r_alpha(alpha) * e, e, float("nan"), float("nan"), "limit")
    s1, s2, panels, L = _quadrature_parts(N, tau)
    if route == "sum":
        one, two = kernel_double_sum(N, tau=tau)
        s1 = N * (one + two)
    elif route != "quadrature":
        raise ValueError(f"unknown route {route!r}")
    v = 2 * e - 2 * (s1 + s2)
    return VarianceResult(v, e, s1, s2, route, panels, L)


def variance_exact(N: int, tau: float, route: str = "quadrature") -> float:
    """Variance of the number of real eigenvalues.

    ``"quadrature"`` integrates the kernel, ``"sum"`` uses the double
    hypergeometric sums for the ``S1 S1`` part, ``"limit"`` returns
    ``r(alpha) E_N`` with ``alpha = sqrt(N(1-tau))``.
    """
    return variance_details(N, tau, route).v


def r_alpha(alpha: float, route: str = "c_ratio") -> float:
    """Limit of ``V_N / E_N`` in the almost-Hermitian regime.

    ``"c_ratio"`` uses ``2 - 2 c(sqrt(2) alpha)/c(alpha)`` with scaled Bessel
    functions; ``"bessel"`` evaluates the unscaled Bessel quotient in mpmath.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if route == "c_ratio":
        return 2.0 - 2.0 * c_alpha(math.sqrt(2) * alpha) / c_alpha(alpha)
    if route == "bessel":
        with mpmath.workdps(40):
            a2 = mpmath.mpf(alpha) ** 2
            num = mpmath.besseli(0, a2) + mpmath.besseli(1, a2)
            den = mpmath.besseli(0, a2 / 2) + mpmath.besseli(1, a2 / 2)
            return float(2 - 2 * mpmath.exp(-a2 / 2) * num / den)
    raise ValueError(f"unknown route {route!r}")


def _regularized_sq_over(l: int, m: int, c_shift: float, tau: float, fact_l: int, fact_m: int) -> ScaledReal:
    # 2F1reg(l-m+1/2, m-l+1/2; c; -tau/(1-tau))^2 / (fact_l! fact_m!)
    a = l - m + 0.5
    b = m - l + 0.5
    c = -l - m + c_shift
    z = -tau / (1 - tau)
    f = hyp2f1_scaled(a, b, c, z) / log_gamma(c)
    denom = log_gamma(fact_l + 1) * log_gamma(fact_m + 1)
    return (f * f) / denom


def kernel_double_sum(N: int, alpha: float | None = None, tau: float | None = None) -> tuple[float, float]:
    """The two double sums whose total is ``(1/N) int int S1^2``."""
    if tau is None:
        if alpha is None:
            raise ValueError("give alpha or tau")
        tau = 1 - alpha * alpha / N
    _check(N, tau)
    if N > MAX_N:
        raise ValueError(f"N must be <= {MAX_N}")
    half = N // 2
    pre = math.pi / 2 * (1 + tau) / (1 - tau) / N

    def total(start: int, shift: float, offset: int) -> float:
        acc = ScaledReal.zero()
        for l in range(start, half):
            for m in range(l, half):
                term = _regularized_sq_over(l, m, shift, tau, 2 * l - offset, 2 * m - offset)
                acc = acc + (term if l == m else term * 2.0)
        return float(acc)

    return pre * total(0, 0.5, 0), pre * total(1, 1.5, 1)


def a_coefficients(k_max: int) -> list:
    """Exact ``a_0..a_{k_max}`` rebuilt from the limit coefficients ``a_k^n``.

    Raises if the recombination disagrees with the closed form for any ``k``.
    """
    if not 0 <= k_max <= 40:
        raise ValueError("k_max must lie in [0, 40]")
    out = []
    for k in range(k_max + 1):
        closed, rebuilt = series.a_coefficients(k)
        if closed != rebuilt:
            raise ArithmeticError(f"a_{k} recombination failed: {rebuilt} != {closed}")
        out.append(rebuilt)
    return out


def comb_identity(k: int) -> bool:
    """True when the central-binomial double-sum identity holds exactly at ``k``."""
    if not 0 <= k <= 200:
        raise ValueError("k must lie in [0, 200]")
    lhs, rhs = series.comb_identity(k)
    return lhs == rhs
