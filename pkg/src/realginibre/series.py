"""Truncated power series with exact rational coefficients.

The generating functions behind the asymptotic coefficients and the
Laurent expansions behind the exact residue formulas are all handled here
in :class:`fractions.Fraction` arithmetic.  Nothing in this module rounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

__all__ = [
    "RationalSeries",
    "CoefficientTable",
    "dfact",
    "binom_general",
    "gen_q",
    "gen_p_hat",
    "gen_p",
    "residue_g",
    "residue_g_rational",
    "residue_a",
    "residue_a_closed",
    "residue_a_n",
    "a_k_n_limit",
    "comb_identity",
    "a_coefficients",
    "q_poly",
    "p_hat_poly",
    "poly_eval",
]

ZERO = Fraction(0)
ONE = Fraction(1)


@lru_cache(maxsize=4096)
def dfact(n: int) -> Fraction:
    """Double factorial extended to negative odd integers.

    ``(-1)!! = 1`` and ``(-2j-1)!! = (-1)^j / (2j-1)!!``.
    """
    if n >= -1:
        if n <= 0:
            return ONE
        return Fraction(math.prod(range(n, 0, -2)))
    if n % 2 == 0:
        raise ValueError(f"double factorial undefined at negative even {n}")
    j = (-n - 1) // 2
    return Fraction((-1) ** j, math.prod(range(2 * j - 1, 0, -2)))


def binom_general(e: int | Fraction, i: int) -> Fraction:
    """Coefficient of ``v**i`` in ``(1 + v)**e`` for rational ``e``."""
    if i < 0:
        return ZERO
    if isinstance(e, int) or (isinstance(e, Fraction) and e.denominator == 1):
        e = int(e)
        if e >= 0:
            return Fraction(math.comb(e, i)) if i <= e else ZERO
        return Fraction((-1) ** i * math.comb(i - e - 1, i))
    out = ONE
    for t in range(i):
        out = out * (e - t) / (t + 1)
    return out


_fact = lru_cache(maxsize=4096)(math.factorial)


def _inv_fact(n: int) -> Fraction:
    return Fraction(1, math.factorial(n))


@dataclass(frozen=True)
class RationalSeries:
    """``sum_{n=0}^{order} coeffs[n] * t**n`` truncated at ``order``."""

    coeffs: tuple
    order: int

    def __post_init__(self):
        cs = tuple(Fraction(c) for c in self.coeffs[: self.order + 1])
        cs = cs + (ZERO,) * (self.order + 1 - len(cs))
        object.__setattr__(self, "coeffs", cs)

    # constructors -------------------------------------------------------
    @classmethod
    def from_coeffs(cls, coeffs: Iterable, order: int | None = None) -> "RationalSeries":
        coeffs = tuple(coeffs)
        return cls(coeffs, len(coeffs) - 1 if order is None else order)

    @classmethod
    def constant(cls, c, order: int) -> "RationalSeries":
        return cls((Fraction(c),), order)

    @classmethod
    def exp(cls, order: int, scale=1) -> "RationalSeries":
        """``exp(scale * t)``."""
        scale = Fraction(scale)
        return cls(tuple(scale**n * _inv_fact(n) for n in range(order + 1)), order)

    @classmethod
    def binomial(cls, exponent, slope, order: int) -> "RationalSeries":
        """``(1 + slope * t) ** exponent`` for rational exponent and slope."""
        exponent, slope = Fraction(exponent), Fraction(slope)
        return cls(tuple(binom_general(exponent, n) * slope**n for n in range(order + 1)), order)

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "RationalSeries":
        if isinstance(other, RationalSeries):
            return other
        return RationalSeries.constant(other, self.order)

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def __len__(self) -> int:
        return self.order + 1

    def __add__(self, other):
        other = self._coerce(other)
        order = min(self.order, other.order)
        return RationalSeries(tuple(self[n] + other[n] for n in range(order + 1)), order)

    __radd__ = __add__

    def __neg__(self):
        return RationalSeries(tuple(-c for c in self.coeffs), self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RationalSeries):
            c = Fraction(other)
            return RationalSeries(tuple(c * a for a in self.coeffs), self.order)
        order = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for n in range(order + 1):
            out.append(sum((a[j] * b[n - j] for j in range(n + 1) if a[j] and b[n - j]), ZERO))
        return RationalSeries(tuple(out), order)

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalSeries":
        a0 = self[0]
        if a0 == 0:
            raise ZeroDivisionError("reciprocal needs a nonzero constant term")
        out = [1 / a0]
        for n in range(1, self.order + 1):
            s = sum((self[j] * out[n - j] for j in range(1, n + 1)), ZERO)
            out.append(-s / a0)
        return RationalSeries(tuple(out), self.order)

    def __truediv__(self, other):
        if not isinstance(other, RationalSeries):
            return self * (1 / Fraction(other))
        return self * other.reciprocal()

    def __pow__(self, p):
        p = Fraction(p)
        if p.denominator == 1 and p >= 0:
            result = RationalSeries.constant(1, self.order)
            base = self
            e = int(p)
            while e:
                if e & 1:
                    result = result * base
                base = base * base
                e >>= 1
            return result
        return self.power(p)

    def power(self, p) -> "RationalSeries":
        """``self ** p`` for rational ``p``; the constant term must be 1.

        Uses ``g' f = p f' g`` coefficientwise.
        """
        p = Fraction(p)
        if self[0] != 1:
            if p.denominator == 1 and self[0] != 0:
                return (self * (1 / self[0])).power(p) * self[0] ** int(p)
            raise ValueError("fractional power needs constant term 1")
        g = [ONE]
        for n in range(1, self.order + 1):
            s = sum(((p * j - (n - j)) * self[j] * g[n - j] for j in range(1, n + 1)), ZERO)
            g.append(s / n)
        return RationalSeries(tuple(g), self.order)

    def compose(self, inner: "RationalSeries") -> "RationalSeries":
        """``self(inner(t))``; ``inner`` must have zero constant term."""
        if inner[0] != 0:
            raise ValueError("inner series must vanish at t = 0")
        order = min(self.order, inner.order)
        result = RationalSeries.constant(self[order], order)
        for n in range(order - 1, -1, -1):
            result = result * inner + self[n]
        return result

    def shift_order(self, order: int) -> "RationalSeries":
        return RationalSeries(self.coeffs, order)

    def __eq__(self, other):
        if not isinstance(other, RationalSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.coeffs, self.order))


# --------------------------------------------------------------------------
# generating functions


@lru_cache(maxsize=None)
def _expm1_over_t(order: int) -> RationalSeries:
    # (e^t - 1)/t = sum t^n / (n+1)!
    return RationalSeries(tuple(_inv_fact(n + 1) for n in range(order + 1)), order)


@lru_cache(maxsize=None)
def _one_minus_emt_over_t(order: int) -> RationalSeries:
    # (1 - e^{-t})/t = sum (-1)^n t^n / (n+1)!
    return RationalSeries(tuple((-1) ** n * _inv_fact(n + 1) for n in range(order + 1)), order)


@lru_cache(maxsize=None)
def _two_over_exp_plus_one(order: int) -> RationalSeries:
    half_sum = (RationalSeries.exp(order) + 1) * Fraction(1, 2)
    return half_sum.reciprocal()


@lru_cache(maxsize=None)
def _gen_q_series(k: int, order: int) -> RationalSeries:
    base = _one_minus_emt_over_t(order).reciprocal()  # t e^t / (e^t - 1)
    return (base ** (k + 2)) * _two_over_exp_plus_one(order)


def gen_q(k: int, s_max: int) -> list[Fraction]:
    """Coefficients of ``(t e^t/(e^t-1))^{k+2} * 2/(e^t+1)`` up to ``t**s_max``."""
    if k < 0 or s_max < 0:
        raise ValueError("k and s_max must be non-negative")
    if s_max > 200:
        raise ValueError("s_max is capped at 200")
    return list(_gen_q_series(k, s_max).coeffs)


@lru_cache(maxsize=None)
def _gen_p_hat_series(k: int, order: int) -> RationalSeries:
    lead = _expm1_over_t(order).power(Fraction(-3, 2))
    return lead * RationalSeries.exp(order, k + 2) * _two_over_exp_plus_one(order)


def gen_p_hat(k: int, l_max: int) -> list[Fraction]:
    """Coefficients of ``((e^t-1)/t)^{-3/2} * 2 e^{t(k+2)}/(e^t+1)``."""
    if k < 0 or l_max < 0:
        raise ValueError("k and l_max must be non-negative")
    if l_max > 200:
        raise ValueError("l_max is capped at 200")
    return list(_gen_p_hat_series(k, l_max).coeffs)


@lru_cache(maxsize=None)
def _gen_p_series(k: int, order: int) -> RationalSeries:
    lead = _expm1_over_t(order).power(Fraction(2 * k - 3, 2))
    return lead * RationalSeries.exp(order, 2) * _two_over_exp_plus_one(order)


def gen_p(k: int, s_max: int) -> list[Fraction]:
    """Coefficients of ``((e^t-1)/t)^{k-3/2} * 2 e^{2t}/(e^t+1)``."""
    if k < 0 or s_max < 0:
        raise ValueError("k and s_max must be non-negative")
    if s_max > 200:
        raise ValueError("s_max is capped at 200")
    return list(_gen_p_series(k, s_max).coeffs)


# --------------------------------------------------------------------------
# residues at zeta = 1

RESIDUE_MAX_N = 2048


def _check_even(N: int) -> None:
    if N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2, got {N}")


def _zeta_power_row(exponent: Fraction, order: int) -> list[Fraction]:
    # zeta^exponent = (1 + w)^exponent with w = zeta - 1
    out = [ONE]
    for n in range(1, order + 1):
        out.append(out[-1] * (exponent - n + 1) / n)
    return out


@lru_cache(maxsize=8)
def _scaled_partial_sums(M: int) -> tuple:
    # P_j = 4^j * sum_{i<=j} binom(-3/2, i); binom(-3/2, i) = (-1)^i (2i+1) C(2i, i) / 4^i
    out = []
    acc = 0
    c = 1
    for j in range(M + 1):
        if j:
            c = c * 2 * (2 * j - 1) // j
        acc = 4 * acc + (-1) ** j * (2 * j + 1) * c
        out.append(acc)
    return tuple(out)


def residue_g_rational(N: int, x) -> Fraction:
    """Rational part of the residue representation of ``g_N(x)``.

    Returns ``R`` with ``g_N(x) = sqrt(pi) * (1 - x)^{-1/2} * R``, where ``R``
    is the coefficient of ``w^{N-2}`` in
    ``(1+w)^{-3/2} (1-w)^{-1} (1 - u w)^{-1/2}`` with ``u = x/(1-x)``.
    """
    _check_even(N)
    if N > RESIDUE_MAX_N:
        raise ValueError(f"exact residue route is capped at N <= {RESIDUE_MAX_N}")
    x = Fraction(x)
    if x > 0:
        raise ValueError("x must be <= 0")
    u = x / (1 - x)
    p, q = u.numerator, u.denominator
    M = N - 2
    P = _scaled_partial_sums(M)
    # sum_n C(2n, n) (u/4)^n * P_{M-n} / 4^{M-n}, cleared by (4q)^M
    total = 0
    c = 1
    pn = 1
    qpow = [1] * (M + 1)
    for i in range(1, M + 1):
        qpow[i] = qpow[i - 1] * q
    for n in range(M + 1):
        if n:
            c = c * 2 * (2 * n - 1) // n
            pn *= p
        total += c * pn * qpow[M - n] * P[M - n]
    return Fraction(total, 4**M * qpow[M])


def residue_g(N: int, x, dps: int = 40) -> mpmath.mpf:
    """``g_N(x)`` from the exact Laurent coefficient, converted at ``dps`` digits."""
    r = residue_g_rational(N, x)
    x = Fraction(x)
    with mpmath.workdps(dps):
        val = mpmath.sqrt(mpmath.pi) / mpmath.sqrt(mpmath.mpf((1 - x).numerator) / (1 - x).denominator) * mpmath.mpf(r.numerator) / r.denominator
        return +val


def residue_a(N: int, k: int) -> Fraction:
    """Residue at ``zeta = 1`` of ``2 N^{-k-1} zeta^{-k-2} (2-zeta)^{-1} (zeta-1)^{-(N-k-1)}``.

    Computed by direct Laurent-coefficient extraction.
    """
    _check_even(N)
    if not 0 <= k <= N - 2:
        raise ValueError(f"k must lie in [0, N-2], got {k}")
    M = N - k - 2
    zrow = RationalSeries.binomial(-(k + 2), 1, M)
    geometric = RationalSeries(tuple(ONE for _ in range(M + 1)), M)  # 1/(2 - zeta) = 1/(1 - w)
    coeff = (zrow * geometric)[M]
    return Fraction(2, N ** (k + 1)) * coeff


def residue_a_closed(N: int, k: int) -> Fraction:
    """Closed form ``(-1)^k sum_{s<=k} q_{k,s} (-1)^s / ((k+1-s)! N^s)``."""
    _check_even(N)
    if not 0 <= k <= N - 2:
        raise ValueError(f"k must lie in [0, N-2], got {k}")
    q = gen_q(k, k)
    total = sum((q[s] * (-1) ** s * _inv_fact(k + 1 - s) / Fraction(N) ** s for s in range(k + 1)), ZERO)
    return (-1) ** k * total


def _inv_fact_or_zero(n: int) -> Fraction:
    return _inv_fact(n) if n >= 0 else ZERO


def _residue_a_n_double(N: int, k: int, n: int) -> Fraction:
    """``a_{N,k}^n`` from the double residue, inner variable zeta first."""
    total = ZERO
    for m in range(k + 1):
        weight = dfact(2 * n + 2 * m - 1) * (-1) ** (k - m) / (
            math.factorial(m) * math.factorial(k - m) * dfact(2 * n - 2 * k + 2 * m - 1)
        )
        # Res_zeta: zeta^{-m-2n-1} (zeta-1)^{-(N-1-m-2n)} / (1 - w^2 v^2)
        #   -> sum_l [w^{N-2-m-2n-2l}] (1+w)^{-m-2n-1} * v^{2l}
        # Res_eta:  eta^{-k+m-1+2n} (eta-1)^{-(N-1-k+m)} v^{2l}
        #   -> [v^{N-2-k+m-2l}] (1+v)^{-k+m-1+2n}
        inner = ZERO
        l = 0
        while True:
            jz = N - 2 - m - 2 * n - 2 * l
            jv = N - 2 - k + m - 2 * l
            if jz < 0 or jv < 0:
                break
            cz = binom_general(-m - 2 * n - 1, jz)
            cv = binom_general(-k + m - 1 + 2 * n, jv)
            inner += cz * cv
            l += 1
        total += weight * inner
    return Fraction((-1) ** n, N ** (k + 1)) * Fraction(2, 2**k) * total


def _residue_a_n_closed(N: int, k: int, n: int) -> Fraction:
    """Single-sum closed form of ``a_{N,k}^n``."""
    total = ZERO
    for m in range(k + 1):
        if k - m - 2 * n < 0:
            continue
        pre = (
            dfact(2 * n + 2 * m - 1)
            * dfact(2 * k - 2 * m - 1 - 2 * n)
            / (math.factorial(m) * math.factorial(k - m) * math.factorial(m + 2 * n) * math.factorial(k - m - 2 * n))
        )
        n_prime = (N - m) // 2 - n - 1
        inner = ZERO
        for l in range(n_prime + 1):
            top = math.factorial(N - 2 - 2 * l) * math.factorial(N - 2 - 2 * l - 2 * n)
            d1 = N - 2 - 2 * l - m - 2 * n
            d2 = N - 2 - 2 * l - k + m
            if d1 < 0 or d2 < 0:
                continue  # 1/(negative)! = 0
            inner += Fraction(top, math.factorial(d1) * math.factorial(d2))
        total += pre * inner
    return Fraction((-1) ** k * 2, 2**k) * total / Fraction(N) ** (k + 1)


def residue_a_n(N: int, k: int, n: int, route: str = "double") -> Fraction:
    """Exact ``a_{N,k}^n`` by the double-residue (``"double"``) or closed-form route."""
    _check_even(N)
    if k < 0 or n < 0:
        raise ValueError("k and n must be non-negative")
    if k > N - 2:
        raise ValueError(f"k must be <= N-2 = {N - 2}")
    if route == "double":
        return _residue_a_n_double(N, k, n)
    if route == "closed":
        return _residue_a_n_closed(N, k, n)
    raise ValueError(f"unknown route {route!r}")


def a_k_n_limit(k: int, n: int) -> Fraction:
    """Large-N limit ``a_k^n`` of ``a_{N,k}^n``."""
    total = ZERO
    for m in range(k + 1):
        if k - m - 2 * n < 0:
            continue
        total += (
            dfact(2 * n + 2 * m - 1)
            * dfact(2 * k - 2 * m - 1 - 2 * n)
            / (math.factorial(m) * math.factorial(k - m) * math.factorial(m + 2 * n) * math.factorial(k - m - 2 * n))
        )
    return Fraction((-1) ** k, 2**k * (k + 1)) * total


# --------------------------------------------------------------------------
# coefficient tables


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class CoefficientTable:
    """A named list of exact coefficients, e.g. ``q_{3, 0..s}``.

    ``index`` holds the fixed indices (``{"k": 3}``); ``values`` run over the
    free index starting at zero.
    """

    kind: str
    index: dict = field(default_factory=dict)
    values: list = field(default_factory=list)

    KINDS = ("q", "p_hat", "p", "c_l", "a_l", "d_s", "a_k", "a_k_n")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        out.update(self.index)
        out["values"] = [_frac_str(v) if isinstance(v, (Fraction, int)) else repr(float(v)) for v in self.values]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "CoefficientTable":
        data = dict(data)
        kind = data.pop("kind")
        values = [Fraction(v) for v in data.pop("values")]
        return cls(kind, data, values)

    @classmethod
    def from_json(cls, text: str) -> "CoefficientTable":
        return cls.from_dict(json.loads(text))

    def regenerate(self) -> "CoefficientTable":
        """Recompute the table from its generating operation."""
        n = len(self.values) - 1
        k = self.index.get("k")
        if self.kind == "q":
            vals = gen_q(k, n)
        elif self.kind == "p_hat":
            vals = gen_p_hat(k, n)
        elif self.kind == "p":
            vals = gen_p(k, n)
        elif self.kind == "a_k_n":
            vals = [a_k_n_limit(j, self.index["n"]) for j in range(n + 1)]
        else:
            raise NotImplementedError(f"regeneration of {self.kind!r} lives in the expected/variance modules")
        return CoefficientTable(self.kind, dict(self.index), vals)


def table(kind: str, k: int, count: int) -> CoefficientTable:
    """Convenience builder for the generating-function tables."""
    gens = {"q": gen_q, "p_hat": gen_p_hat, "p": gen_p}
    return CoefficientTable(kind, {"k": k}, gens[kind](k, count - 1))


def comb_identity(k: int) -> tuple[Fraction, Fraction]:
    """Both sides of the central-binomial double-sum identity at ``k``.

    Returns ``(binom(2k, k), double_sum)``; terms whose factorial arguments
    ``m + 2n`` or ``k - m - 2n`` are negative vanish.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    h = k // 2
    # every term is an integer multiple of 1/(k! * 2^k * (2k+1)!!), so sum numerators exactly
    scale = math.factorial(k) * 2**k * math.prod(range(2 * k + 1, 0, -2))
    total = 0
    for m in range(k + 1):
        inner = 0
        for n in range(-h, h + 1):
            if m + 2 * n < 0 or k - m - 2 * n < 0:
                continue
            a = dfact(2 * n + 2 * m - 1)
            b = dfact(2 * k - 2 * m - 2 * n - 1)
            num = a.numerator * b.numerator * scale
            den = a.denominator * b.denominator * _fact(m + 2 * n) * _fact(k - m - 2 * n)
            q, r = divmod(num, den)
            if r:
                raise ArithmeticError("common denominator too small")
            inner += q
        total += math.comb(k, m) * inner
    return Fraction(math.comb(2 * k, k)), Fraction(total, scale)


def a_coefficients(k: int) -> tuple[Fraction, Fraction]:
    """``a_k`` in closed form and recombined from the limit coefficients ``a_k^n``."""
    closed = Fraction((-1) ** k) * dfact(2 * k - 1) / (math.factorial(k) * math.factorial(k + 1))
    recombined = a_k_n_limit(k, 0) + 2 * sum((a_k_n_limit(k, n) for n in range(1, k // 2 + 1)), ZERO)
    return closed, recombined


def _interpolate(values: Sequence[Fraction]) -> list[Fraction]:
    """Monomial coefficients of the polynomial through ``(i, values[i])``."""
    n = len(values)
    coeffs = [ZERO] * n
    for i, v in enumerate(values):
        if v == 0:
            continue
        # Lagrange basis prod_{j != i} (k - j) / (i - j)
        basis = [ONE]
        denom = 1
        for j in range(n):
            if j == i:
                continue
            basis = [ZERO] + basis
            for t in range(len(basis) - 1):
                basis[t] -= j * basis[t + 1]
            denom *= i - j
        for t in range(n):
            coeffs[t] += v * basis[t] / denom
    return coeffs


@lru_cache(maxsize=None)
def q_poly(s: int) -> tuple:
    """``q_{k,s}`` as a degree-``s`` polynomial in ``k`` (ascending coefficients)."""
    return tuple(_interpolate([gen_q(k, s)[s] for k in range(s + 1)]))


@lru_cache(maxsize=None)
def p_hat_poly(l: int) -> tuple:
    """``p-hat_{k,l}`` as a degree-``l`` polynomial in ``k``."""
    return tuple(_interpolate([gen_p_hat(k, l)[l] for k in range(l + 1)]))


def poly_eval(coeffs: Sequence, x):
    out = 0 * x
    for c in reversed(coeffs):
        out = out * x + c
    return out
