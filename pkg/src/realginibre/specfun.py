"""Special functions used throughout the package.

Everything here works on plain Python floats.  Quantities that can leave
the double range (Gamma values at large argument, Hermite polynomials of
high degree, hypergeometric prefactors) are carried as :class:`ScaledReal`,
a sign together with the natural log of the magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "ScaledReal",
    "PoleError",
    "NoConvergentPathError",
    "SeriesConvergenceError",
    "erf",
    "erfc",
    "bessel_i",
    "bessel_ie",
    "gamma",
    "log_gamma",
    "hyp2f1",
    "hyp2f1_scaled",
    "hyp2f1_regularized",
    "hermite_scaled",
    "double_factorial",
]

_LOG_PI = math.log(math.pi)
_SQRT_PI = math.sqrt(math.pi)
_RESCALE = 1e150


class PoleError(ValueError):
    """Raised when a function is evaluated at one of its poles."""


class NoConvergentPathError(ValueError):
    """Raised by :func:`hyp2f1` when no transformation yields a convergent series."""


class SeriesConvergenceError(RuntimeError):
    """Raised when a series fails to converge within its term budget."""


@dataclass(frozen=True)
class ScaledReal:
    """A real number stored as ``sign * exp(log_mag)``.

    ``log_mag`` is ignored when ``sign == 0``.
    """

    sign: int
    log_mag: float

    @classmethod
    def from_float(cls, x: float) -> "ScaledReal":
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def zero(cls) -> "ScaledReal":
        return cls(0, -math.inf)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_mag)

    def to_float(self) -> float:
        return float(self)

    def __mul__(self, other):
        if not isinstance(other, ScaledReal):
            other = ScaledReal.from_float(float(other))
        if self.sign == 0 or other.sign == 0:
            return ScaledReal.zero()
        return ScaledReal(self.sign * other.sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, ScaledReal):
            other = ScaledReal.from_float(float(other))
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero ScaledReal")
        if self.sign == 0:
            return ScaledReal.zero()
        return ScaledReal(self.sign * other.sign, self.log_mag - other.log_mag)

    def __neg__(self):
        return ScaledReal(-self.sign, self.log_mag)

    def __pow__(self, p: float):
        if self.sign == 0:
            if p <= 0:
                raise ZeroDivisionError("zero to a non-positive power")
            return ScaledReal.zero()
        if self.sign < 0 and not float(p).is_integer():
            raise ValueError("fractional power of a negative ScaledReal")
        sign = -1 if (self.sign < 0 and int(p) % 2) else 1
        return ScaledReal(sign, self.log_mag * p)

    def __add__(self, other):
        if not isinstance(other, ScaledReal):
            other = ScaledReal.from_float(float(other))
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        big, small = (self, other) if self.log_mag >= other.log_mag else (other, self)
        ratio = math.exp(small.log_mag - big.log_mag)
        mag = 1.0 + ratio if big.sign == small.sign else 1.0 - ratio
        if mag == 0.0:
            return ScaledReal.zero()
        return ScaledReal(big.sign, big.log_mag + math.log(mag))

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, ScaledReal):
            other = ScaledReal.from_float(float(other))
        return self + (-other)


# --------------------------------------------------------------------------
# error function


def erf(x: float) -> float:
    return math.erf(x)


def erfc(x: float) -> float:
    """Complementary error function, accurate in the far right tail."""
    return math.erfc(x)


# --------------------------------------------------------------------------
# modified Bessel functions I_0, I_1

_BESSEL_SERIES_MAX_X = 20.0


def _bessel_i_series(nu: int, x: float) -> float:
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    half = 0.5 * x
    term = half**nu / math.factorial(nu)
    total = term
    q = half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if term <= 1e-17 * total:
            return total


def _bessel_ie_asymptotic(nu: int, x: float) -> float:
    # e^{-x} I_nu(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(nu) / x^k
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(new) >= abs(term) or abs(new) < 1e-17 * abs(total):
            if abs(new) < abs(term):
                total += new
            break
        term = new
        total += term
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_ie(nu: int, x: float) -> float:
    """Exponentially scaled modified Bessel function ``exp(-x) * I_nu(x)``."""
    if nu not in (0, 1):
        raise ValueError("only nu = 0 and nu = 1 are supported")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x <= _BESSEL_SERIES_MAX_X:
        return math.exp(-x) * _bessel_i_series(nu, x)
    return _bessel_ie_asymptotic(nu, x)


def bessel_i(nu: int, x: float) -> float:
    """Modified Bessel function of the first kind, orders 0 and 1."""
    if nu not in (0, 1):
        raise ValueError("only nu = 0 and nu = 1 are supported")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x <= _BESSEL_SERIES_MAX_X:
        return _bessel_i_series(nu, x)
    return math.exp(x) * _bessel_ie_asymptotic(nu, x)


# --------------------------------------------------------------------------
# Gamma


def double_factorial(n: int) -> int:
    """``n!!`` for integers ``n >= -1`` (with ``0!! = (-1)!! = 1``)."""
    if n < -1:
        raise ValueError("n must be >= -1")
    if n <= 0:
        return 1
    if n % 2:
        m = (n + 1) // 2
        return math.factorial(2 * m) // (2**m * math.factorial(m))
    m = n // 2
    return 2**m * math.factorial(m)


@lru_cache(maxsize=4096)
def _log_gamma_half_integer(two_x: int) -> ScaledReal:
    # x = two_x / 2 with two_x odd
    if two_x > 0:
        n = (two_x - 1) // 2  # Gamma(n + 1/2) = (2n-1)!! sqrt(pi) / 2^n
        log_mag = math.log(double_factorial(2 * n - 1)) - n * math.log(2.0) + 0.5 * _LOG_PI
        return ScaledReal(1, log_mag)
    m = (1 - two_x) // 2  # Gamma(1/2 - m) = (-2)^m sqrt(pi) / (2m-1)!!
    log_mag = m * math.log(2.0) + 0.5 * _LOG_PI - math.log(double_factorial(2 * m - 1))
    return ScaledReal(-1 if m % 2 else 1, log_mag)


def log_gamma(x: float) -> ScaledReal:
    """Gamma function as a :class:`ScaledReal`.

    Integers and half-integers go through exact factorial arithmetic.
    Raises :class:`PoleError` at the non-positive integers.
    """
    x = float(x)
    if x <= 0 and x.is_integer():
        raise PoleError(f"Gamma has a pole at {x}")
    if x.is_integer():
        return ScaledReal(1, math.log(math.factorial(int(x) - 1)))
    if (2.0 * x).is_integer():
        return _log_gamma_half_integer(int(2.0 * x))
    sign = 1
    if x < 0 and math.floor(x) % 2 == 1:
        sign = -1
    return ScaledReal(sign, math.lgamma(x))


def gamma(x: float) -> float:
    x = float(x)
    if 0 < x <= 171 and x.is_integer():
        return float(math.factorial(int(x) - 1))
    if (2.0 * x).is_integer() and abs(x) < 150:
        n = int(2.0 * x)
        if n > 0:
            m = (n - 1) // 2
            return double_factorial(2 * m - 1) / 2**m * _SQRT_PI
        if n < 0:
            m = (1 - n) // 2
            return (-2) ** m / double_factorial(2 * m - 1) * _SQRT_PI
    return float(log_gamma(x))


# --------------------------------------------------------------------------
# Gauss hypergeometric function


def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _default_term_cap(z: float) -> int:
    az = abs(z)
    if az == 0.0:
        return 1
    # room for |z|^n to drop by ~1e-30 on top of polynomial growth of the coefficients
    need = 70.0 / max(-math.log(az), 1e-12)
    return int(max(10_000, min(need * 1.5, 5_000_000)))


def _gauss_series(a: float, b: float, c: float, z: float, max_terms: int | None) -> ScaledReal:
    """Direct Gauss series, summed with on-the-fly rescaling."""
    if z == 0.0:
        return ScaledReal(1, 0.0)
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        last = int(min(-a if _is_nonpos_int(a) else math.inf, -b if _is_nonpos_int(b) else math.inf))
        terminating = True
    else:
        last = max_terms if max_terms is not None else _default_term_cap(z)
        terminating = False
        if abs(z) >= 1.0:
            raise NoConvergentPathError(f"Gauss series diverges at z={z}")

    term = 1.0
    total = 1.0
    log_scale = 0.0
    tail_factor = 1.0 / (1.0 - abs(z)) if not terminating else 1.0
    for s in range(last):
        den = (c + s) * (s + 1)
        if den == 0.0:
            raise PoleError(f"2F1 pole: c + {s} = 0 with c={c}")
        term *= (a + s) * (b + s) / den * z
        total += term
        if abs(total) > _RESCALE or abs(term) > _RESCALE:
            scale = max(abs(total), abs(term))
            total /= scale
            term /= scale
            log_scale += math.log(scale)
        if not terminating and abs(term) * tail_factor <= 1e-17 * abs(total) and s > 2:
            # terms must be decreasing for the tail bound to be meaningful
            nxt = abs((a + s + 1) * (b + s + 1) / ((c + s + 1) * (s + 2)) * z)
            if nxt < 1.0:
                break
    else:
        if not terminating:
            raise SeriesConvergenceError(
                f"2F1({a}, {b}; {c}; {z}) did not converge in {last} terms"
            )
    res = ScaledReal.from_float(total)
    if res.sign == 0:
        return res
    return ScaledReal(res.sign, res.log_mag + log_scale)


def _prefactor(base: float, power: float) -> ScaledReal:
    # base ** power for base > 0
    return ScaledReal(1, power * math.log(base))


def hyp2f1_scaled(a: float, b: float, c: float, z: float, max_terms: int | None = None) -> ScaledReal:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real arguments.

    Path choice, in order of preference:

    * a terminating Gauss series when ``a`` or ``b`` is a non-positive integer;
    * for ``z < 1``, a Pfaff or Euler transform whose series terminates;
    * the direct series when ``|z| <= 1/2``;
    * otherwise whichever of ``z`` and the Pfaff image ``z/(z-1)`` has the
      smaller modulus below one.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if z == 0.0:
        return ScaledReal(1, 0.0)
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _gauss_series(a, b, c, z, max_terms)

    if z < 1.0:
        w = z / (z - 1.0)
        options = []
        # Pfaff on a: (1-z)^{-a} F(a, c-b; c; w)
        if _is_nonpos_int(c - b):
            options.append((-(c - b), "pfaff_a"))
        # Pfaff on b: (1-z)^{-b} F(c-a, b; c; w)
        if _is_nonpos_int(c - a):
            options.append((-(c - a), "pfaff_b"))
        if options:
            _, kind = min(options)
            if kind == "pfaff_a":
                return _prefactor(1.0 - z, -a) * _gauss_series(a, c - b, c, w, max_terms)
            return _prefactor(1.0 - z, -b) * _gauss_series(c - a, b, c, w, max_terms)
        # Euler: (1-z)^{c-a-b} F(c-a, c-b; c; z); terminating cases are caught above
        # whenever Pfaff applies, so only the z-range matters here.

    if abs(z) <= 0.5:
        return _gauss_series(a, b, c, z, max_terms)

    candidates = []
    if abs(z) < 1.0:
        candidates.append((abs(z), "direct"))
    if z < 1.0:
        w = z / (z - 1.0)
        if abs(w) < 1.0:
            candidates.append((abs(w), "pfaff"))
    if not candidates:
        raise NoConvergentPathError(f"no convergent path for 2F1({a}, {b}; {c}; {z})")
    _, kind = min(candidates)
    if kind == "direct":
        return _gauss_series(a, b, c, z, max_terms)
    w = z / (z - 1.0)
    return _prefactor(1.0 - z, -a) * _gauss_series(a, c - b, c, w, max_terms)


def hyp2f1(a: float, b: float, c: float, z: float, max_terms: int | None = None) -> float:
    return float(hyp2f1_scaled(a, b, c, z, max_terms))


def hyp2f1_regularized(a: float, b: float, c: float, z: float, max_terms: int | None = None) -> ScaledReal:
    """``2F1(a, b; c; z) / Gamma(c)`` in log-magnitude form."""
    return hyp2f1_scaled(a, b, c, z, max_terms) / log_gamma(c)


# --------------------------------------------------------------------------
# Hermite polynomials (physicists' convention)


def hermite_scaled(k: int, x: float) -> ScaledReal:
    """``H_k(x)`` by the three-term recurrence, rescaled to avoid overflow."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    x = float(x)
    if k == 0:
        return ScaledReal(1, 0.0)
    h_prev, h = 1.0, 2.0 * x
    log_scale = 0.0
    for n in range(1, k):
        h_prev, h = h, 2.0 * x * h - 2.0 * n * h_prev
        m = abs(h)
        if m > _RESCALE:
            h /= m
            h_prev /= m
            log_scale += math.log(m)
    res = ScaledReal.from_float(h)
    if res.sign == 0:
        return res
    return ScaledReal(res.sign, res.log_mag + log_scale)
