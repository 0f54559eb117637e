"""Expected number of real eigenvalues of the real elliptic Ginibre ensemble.

Exact finite-N values come from a terminating hypergeometric sum or from an
exact rational residue.  Large-N expansions are provided for the
almost-Hermitian scaling ``tau = 1 - alpha**2/N`` and for fixed ``tau``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special as sp

from . import series
from .quadrature import gauss_kronrod
from .series import dfact, poly_eval, q_poly, p_hat_poly, gen_p
from .specfun import bessel_ie

__all__ = [
    "RegimeParam",
    "ExpansionResult",
    "expected_exact",
    "expected_exact_mp",
    "d_coeff",
    "c_alpha",
    "c0_alpha",
    "c_l_alpha",
    "c_l_polynomials",
    "a_l",
    "expected_asymptotic_ah",
    "expected_asymptotic_elliptic",
]

HYPERGEOMETRIC_MAX_N = 10_000


@dataclass(frozen=True)
class RegimeParam:
    """Either a fixed ``tau`` or the almost-Hermitian pair ``(alpha, N)``."""

    mode: str
    tau: float | None = None
    alpha: float | None = None
    N: int | None = None

    def __post_init__(self):
        if self.mode == "tau":
            # tau = 1 is the symmetric ensemble; only sampling accepts it
            if self.tau is None or not 0 <= self.tau <= 1:
                raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        elif self.mode == "alpha":
            if self.alpha is None or self.alpha <= 0:
                raise ValueError(f"alpha must be positive, got {self.alpha}")
            if self.N is None or self.N < 1:
                raise ValueError("alpha mode needs a positive N")
            if self.alpha**2 >= self.N:
                raise ValueError(f"alpha^2 = {self.alpha**2} must be below N = {self.N}")
        else:
            raise ValueError(f"mode must be 'tau' or 'alpha', got {self.mode!r}")

    @classmethod
    def from_tau(cls, tau: float, N: int | None = None) -> "RegimeParam":
        return cls("tau", tau=float(tau), N=N)

    @classmethod
    def from_alpha(cls, alpha: float, N: int) -> "RegimeParam":
        return cls("alpha", alpha=float(alpha), N=int(N))

    @property
    def tau_n(self) -> float:
        if self.mode == "tau":
            return self.tau
        return 1.0 - self.alpha**2 / self.N

    @property
    def tau_exact(self) -> Fraction:
        """``tau_N`` as an exact rational built from the decimal repr of the inputs."""
        if self.mode == "tau":
            return Fraction(repr(self.tau))
        return 1 - Fraction(repr(self.alpha)) ** 2 / self.N

    def alpha_for(self, N: int) -> float:
        """``alpha`` such that ``1 - alpha**2/N`` equals this ``tau``."""
        return math.sqrt(N * (1.0 - self.tau_n))


@dataclass
class ExpansionResult:
    value: float
    terms: list = field(default_factory=list)
    order: int = 0

    def __post_init__(self):
        if self.terms and not math.isclose(self.value, math.fsum(t for _, t in self.terms), rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError("value must equal the sum of terms")


# --------------------------------------------------------------------------
# exact values


def _check_n(N: int) -> None:
    if not isinstance(N, (int, np.integer)) or N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2, got {N!r}")


def _check_tau(tau) -> None:
    if tau == 1:
        raise ValueError("tau = 1 is the symmetric case; every eigenvalue is real and E = N")
    if not 0 <= tau < 1:
        raise ValueError(f"tau must lie in [0, 1), got {tau}")


def _hypergeometric_sum(N: int, tau: float) -> float:
    # sum_k Gamma(2k+1/2)/(2k)! * 2F1(1/2, -2k; 1/2-2k; tau): after the Pfaff
    # transform every term is positive, so plain float accumulation is stable.
    total = 0.0
    weight = math.sqrt(math.pi)
    for k in range(N // 2):
        if k:
            weight *= (2 * k - 1.5) * (2 * k - 0.5) / ((2 * k - 1) * (2 * k))
        n = 2 * k
        if n == 0 or tau == 0:
            f = 1.0
        else:
            j = np.arange(n, dtype=float)
            ratio = (0.5 + j) * (n - j) / ((n - 0.5 - j) * (j + 1.0)) * tau
            f = 1.0 + float(np.cumprod(ratio).sum())
        total += weight * f
    return total


def expected_exact(N: int, tau: float, route: str = "hypergeometric") -> float:
    """Exact expected number of real eigenvalues at finite even ``N``.

    ``route="hypergeometric"`` sums the terminating series (N up to 10^4);
    ``route="residue"`` evaluates the exact rational residue (N up to 2048).
    """
    _check_n(N)
    _check_tau(tau)
    if route == "hypergeometric":
        if N > HYPERGEOMETRIC_MAX_N:
            raise ValueError(f"hypergeometric route is capped at N <= {HYPERGEOMETRIC_MAX_N}")
        return math.sqrt(2.0 * (1.0 + tau) / math.pi) * _hypergeometric_sum(N, float(tau))
    if route == "residue":
        return float(expected_exact_mp(N, tau))
    raise ValueError(f"unknown route {route!r}")


def expected_exact_mp(N: int, tau, dps: int = 40) -> mpmath.mpf:
    """Residue route at ``dps`` digits; ``tau`` may be a float or a Fraction.

    Floats are read through their shortest decimal repr so that ``0.1`` is
    treated as ``1/10``.
    """
    _check_n(N)
    t = tau if isinstance(tau, Fraction) else Fraction(repr(float(tau)))
    _check_tau(t)
    r = series.residue_g_rational(N, -t / (1 - t))
    with mpmath.workdps(dps):
        one_plus = mpmath.mpf((1 + t).numerator) / (1 + t).denominator
        return +(mpmath.sqrt(2 * one_plus) * mpmath.mpf(r.numerator) / r.denominator)


# --------------------------------------------------------------------------
# almost-Hermitian coefficients; y = alpha^2/2 throughout


def _y(alpha: float) -> float:
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return 0.5 * alpha * alpha


def _d_series_coeff(s: int, k: int) -> Fraction:
    # coefficient of y^k in d_s
    if k < s:
        return Fraction(0)
    q = poly_eval(q_poly(s), k)
    return Fraction((-1) ** (s + k), 2) * q * dfact(2 * k - 1) / (math.factorial(k + 1 - s) * math.factorial(k))


def _series_dps(y) -> int:
    # alternating terms peak near e^{2y}; carry enough digits to absorb that
    return int(30 + 0.87 * float(y) + 2 * math.log10(2 + float(y)))


def _d_series_mp(s: int, y) -> mpmath.mpf:
    with mpmath.workdps(_series_dps(y)):
        y = mpmath.mpf(y)
        total = mpmath.mpf(0)
        k = s
        small = 0
        while True:
            c = _d_series_coeff(s, k)
            term = mpmath.mpf(c.numerator) / c.denominator * y**k
            total += term
            if k > 2 * y + 10 and abs(term) < mpmath.mpf(10) ** (-25) * max(abs(total), 1e-30):
                small += 1
                if small > 3:
                    break
            k += 1
        return total


def d_coeff(s: int, alpha: float, route: str = "bessel") -> float:
    """``d_s(alpha)``, the ``N^{-s}`` coefficient of the scaled residue sum.

    The Bessel form is available for ``s`` in ``{0, 1}``; the power-series
    form works for any ``s``.
    """
    y = _y(alpha)
    if route == "series":
        return float(_d_series_mp(s, y))
    if route != "bessel":
        raise ValueError(f"unknown route {route!r}")
    i0, i1 = bessel_ie(0, y), bessel_ie(1, y)
    if s == 0:
        return 0.5 * (i0 + i1)
    if s == 1:
        return 0.25 + 0.125 * ((2 * y - 2) * i0 - 2 * y * i1)
    raise ValueError("the Bessel form of d_s is available for s in {0, 1}")


def _c_integrand(alpha: float):
    return lambda s: sp.erf(alpha * np.sqrt(np.clip(1.0 - s * s, 0.0, None)))


def c_alpha(alpha: float, route: str = "bessel") -> float:
    """Leading coefficient ``c(alpha)``: ``E ~ N c(alpha)``.

    ``route="integral"`` integrates the erf representation on ``[0, 1]``.
    """
    y = _y(alpha)
    if route == "bessel":
        return bessel_ie(0, y) + bessel_ie(1, y)
    if route == "integral":
        integral = float(gauss_kronrod(_c_integrand(alpha), 0.0, 1.0, abstol=1e-13, reltol=1e-13))
        return 2.0 / (alpha * math.sqrt(math.pi)) * integral
    raise ValueError(f"unknown route {route!r}")


def c0_alpha(alpha: float) -> float:
    """Constant-order coefficient ``c_0(alpha)`` (the expansion adds a further 1/2)."""
    y = _y(alpha)
    return -0.5 * (bessel_ie(0, y) + 2 * y * bessel_ie(1, y))


def _b_coeff(j: int) -> Fraction:
    # y^j coefficient of alpha * (2k-1)!!/(k+1)! (alpha/2)^{2k+1} with j = k+1
    return dfact(2 * j - 3) * Fraction(2, 2**j) / math.factorial(j)


@lru_cache(maxsize=None)
def _c_l_series(l: int, order: int) -> tuple:
    """Exact power series of ``c_l`` in ``y`` up to ``y**order``."""
    d = [[_d_series_coeff(s, k) for k in range(order + 1)] for s in range(l + 2)]
    out = []
    for n in range(order + 1):
        v = 2 * d[l + 1][n]
        for j in range(1, l + 2):
            if n - j >= 0:
                v -= _b_coeff(j) * d[l + 1 - j][n - j]
        out.append(v)
    return tuple(out)


def _bessel_series(order: int):
    e0 = [Fraction((-1) ** k) * dfact(2 * k - 1) / math.factorial(k) ** 2 for k in range(order + 1)]
    e1 = [Fraction(0)] + [
        Fraction((-1) ** (k + 1)) * dfact(2 * k - 1) / (math.factorial(k - 1) * math.factorial(k + 1))
        for k in range(1, order + 1)
    ]
    return e0, e1


def _solve_exact(rows: list, rhs: list) -> list:
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


@lru_cache(maxsize=None)
def c_l_polynomials(l: int) -> tuple:
    """Exact ``(P0, P1)`` in ``y = alpha^2/2`` with ``c_l = e^{-y}(P0 I0(y) + P1 I1(y))``.

    Found by matching power series; extra orders are checked for consistency.
    """
    if not 1 <= l <= 8:
        raise ValueError("l must lie in [1, 8]")
    deg = 2 * l + 1
    unknowns = 2 * (deg + 1)
    extra = 12
    order = unknowns + extra
    target = _c_l_series(l, order)
    e0, e1 = _bessel_series(order)

    def row(n):
        r = [e0[n - i] if n >= i else Fraction(0) for i in range(deg + 1)]
        r += [e1[n - i] if n >= i else Fraction(0) for i in range(deg + 1)]
        return r

    sol = _solve_exact([row(n) for n in range(unknowns)], list(target[:unknowns]))
    for n in range(unknowns, order + 1):
        if sum(c * v for c, v in zip(row(n), sol)) != target[n]:
            raise ArithmeticError(f"c_{l} is not of Bessel-polynomial form to degree {deg}")
    return tuple(sol[: deg + 1]), tuple(sol[deg + 1 :])


def _c_l_bessel_mp(l: int, y, dps: int = 30) -> mpmath.mpf:
    p0, p1 = c_l_polynomials(l)
    deg = len(p0) - 1
    with mpmath.workdps(dps + int(2 * deg * math.log10(2 + float(y)))):
        y = mpmath.mpf(y)
        e = mpmath.exp(-y)
        i0, i1 = mpmath.besseli(0, y), mpmath.besseli(1, y)
        v0 = poly_eval([mpmath.mpf(c.numerator) / c.denominator for c in p0], y)
        v1 = poly_eval([mpmath.mpf(c.numerator) / c.denominator for c in p1], y)
        return +(e * (v0 * i0 + v1 * i1))


def _c_l_series_mp(l: int, y) -> mpmath.mpf:
    with mpmath.workdps(_series_dps(y)):
        y = mpmath.mpf(y)
        total = mpmath.mpf(0)
        order = 64
        n = 0
        small = 0
        coeffs = _c_l_series(l, order)
        while True:
            if n > order:
                order *= 2
                coeffs = _c_l_series(l, order)
            c = coeffs[n]
            term = mpmath.mpf(c.numerator) / c.denominator * y**n
            total += term
            if n > 2 * y + 10 and abs(term) < mpmath.mpf(10) ** (-25) * max(abs(total), 1e-30):
                small += 1
                if small > 3:
                    break
            n += 1
        return total


def c_l_alpha(l: int, alpha: float, route: str = "bessel") -> float:
    """Coefficient of ``N^{-l}`` in the almost-Hermitian expansion (``1 <= l <= 8``)."""
    y = _y(alpha)
    if route == "bessel":
        return float(_c_l_bessel_mp(l, y))
    if route == "series":
        if not 1 <= l <= 8:
            raise ValueError("l must lie in [1, 8]")
        return float(_c_l_series_mp(l, y))
    raise ValueError(f"unknown route {route!r}")


def expected_asymptotic_ah(param: RegimeParam, m: int) -> ExpansionResult:
    """``N c + c_0 + 1/2 + sum_{l<m} c_l / N^l`` at ``tau_N = 1 - alpha^2/N``."""
    if param.mode != "alpha":
        raise ValueError("the almost-Hermitian expansion needs an alpha-mode RegimeParam")
    if not 1 <= m <= 9:
        raise ValueError("m must lie in [1, 9]")
    N, alpha = param.N, param.alpha
    y = _y(alpha)
    terms = [("N*c(alpha)", N * c_alpha(alpha))]
    if m >= 1:
        terms.append(("c_0(alpha)+1/2", c0_alpha(alpha) + 0.5))
    for l in range(1, m):
        terms.append((f"c_{l}(alpha)/N^{l}", float(_c_l_bessel_mp(l, y) / mpmath.mpf(N) ** l)))
    return ExpansionResult(math.fsum(t for _, t in terms), terms, m)


# --------------------------------------------------------------------------
# fixed tau


@lru_cache(maxsize=None)
def _p_l_poly(l: int) -> tuple:
    pre = dfact(2 * l - 3) / 2**l
    return tuple(
        pre * (-1) ** (k + 1) * dfact(2 * k - 1) / (2**k * math.factorial(k)) * gen_p(k, l - k)[l - k]
        for k in range(l + 1)
    )


def _a_l_hat(l: int, tau: float) -> float:
    poly = p_hat_poly(l)
    pre = -math.sqrt(1.0 - tau) * float(dfact(2 * l - 3)) / 2**l
    total = 0.0
    weight = 1.0  # (2k-1)!!/(2^k k!) tau^k
    k = 0
    while True:
        term = weight * float(poly_eval(poly, k))
        total += term
        k += 1
        weight *= tau * (2 * k - 1) / (2 * k)
        if weight * (abs(float(poly_eval(poly, k))) + 1) < 1e-18 * max(abs(total), 1e-300):
            break
        if k > 10**6:
            raise RuntimeError("a_l series did not converge")
    return pre * total


def a_l(l: int, tau, route: str = "polynomial"):
    """Coefficient ``a_l(tau)`` of the fixed-tau expansion.

    ``route="polynomial"`` evaluates ``P_l(tau/(tau-1))``; with a Fraction
    argument the result is exact.  ``route="series"`` sums the defining
    power series in ``tau``.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if route == "polynomial":
        x = tau / (tau - 1)
        return poly_eval(_p_l_poly(l), x)
    if route == "series":
        return _a_l_hat(l, float(tau))
    raise ValueError(f"unknown route {route!r}")


def expected_asymptotic_elliptic(tau: float, N: int, m: int) -> ExpansionResult:
    """``sqrt(2N(1+tau)/(pi(1-tau))) (1 + sum_{l<m} a_l/N^l) + 1/2`` at fixed ``tau``."""
    _check_tau(tau)
    if not 1 <= m <= 6:
        raise ValueError("m must lie in [1, 6]")
    if N * (1.0 - tau) < 10.0:
        warnings.warn(
            f"N(1 - tau) = {N * (1 - tau):.3g} is small; this is the almost-Hermitian regime, "
            "use expected_asymptotic_ah",
            stacklevel=2,
        )
    lead = math.sqrt(2.0 * N * (1.0 + tau) / (math.pi * (1.0 - tau)))
    terms = [("leading", lead)]
    for l in range(1, m):
        terms.append((f"a_{l}(tau)/N^{l} term", lead * float(a_l(l, tau)) / N**l))
    terms.append(("1/2", 0.5))
    return ExpansionResult(math.fsum(t for _, t in terms), terms, m)
