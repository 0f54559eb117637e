import math

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from realginibre import specfun
from realginibre.specfun import ScaledReal

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).filter(lambda v: abs(v) > 1e-6)


@given(finite, finite)
def test_scaled_real_arithmetic_matches_floats(a, b):
    sa, sb = ScaledReal.from_float(a), ScaledReal.from_float(b)
    assert float(sa * sb) == pytest.approx(a * b, rel=1e-12)
    assert float(sa / sb) == pytest.approx(a / b, rel=1e-12)
    assume(abs(a + b) > 1e-6 * max(abs(a), abs(b)))
    assert float(sa + sb) == pytest.approx(a + b, rel=1e-9)
    assert float(sa - sb) == pytest.approx(a - b, rel=1e-9, abs=1e-9 * max(abs(a), abs(b)))


def test_scaled_real_beyond_double_range():
    big = ScaledReal(1, 1000.0)
    assert (big * big).log_mag == 2000.0
    assert float((big * big) / big / big) == pytest.approx(1.0)
    assert (big ** 3).log_mag == pytest.approx(3000.0)
    with pytest.raises(ValueError):
        ScaledReal(-1, 0.0) ** 0.5
    with pytest.raises(ZeroDivisionError):
        big / ScaledReal.zero()


def test_zero_is_additive_identity():
    z = ScaledReal.zero()
    assert float(z + 3.0) == pytest.approx(3.0, rel=1e-15)
    assert float(z * 5.0) == 0.0
    x = ScaledReal.from_float(2.5)
    assert float(x - x) == 0.0


@given(st.floats(min_value=-6, max_value=6))
def test_erf_against_mpmath(x):
    assert specfun.erf(x) == pytest.approx(float(mpmath.erf(x)), rel=1e-14, abs=1e-300)
    assert specfun.erfc(x) == pytest.approx(float(mpmath.erfc(x)), rel=1e-13)


@pytest.mark.parametrize("nu", [0, 1])
@given(x=st.floats(min_value=0, max_value=700))
def test_bessel_against_mpmath(nu, x):
    want = mpmath.besseli(nu, x)
    assert specfun.bessel_i(nu, x) == pytest.approx(float(want), rel=1e-13, abs=1e-300)
    assert specfun.bessel_ie(nu, x) == pytest.approx(float(want * mpmath.exp(-x)), rel=1e-13, abs=1e-300)


def test_bessel_scaled_survives_large_argument():
    x = 1e5
    assert specfun.bessel_ie(0, x) == pytest.approx(float(mpmath.besseli(0, x) * mpmath.exp(-x)), rel=1e-13)
    with pytest.raises(ValueError):
        specfun.bessel_i(2, 1.0)
    with pytest.raises(ValueError):
        specfun.bessel_ie(0, -1.0)


def test_double_factorial_values():
    assert [specfun.double_factorial(n) for n in range(-1, 8)] == [1, 1, 1, 2, 3, 8, 15, 48, 105]
    with pytest.raises(ValueError):
        specfun.double_factorial(-2)


@given(st.floats(min_value=0.01, max_value=300))
def test_log_gamma_against_mpmath(x):
    g = specfun.log_gamma(x)
    assert g.sign == 1
    assert g.log_mag == pytest.approx(float(mpmath.loggamma(x)), rel=1e-12, abs=1e-12)


def test_gamma_signs_and_poles():
    assert specfun.gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi))
    assert specfun.gamma(-1.5) == pytest.approx(4 * math.sqrt(math.pi) / 3)
    assert specfun.log_gamma(-2.5).sign == -1
    assert specfun.gamma(0.5) == pytest.approx(math.sqrt(math.pi))
    for p in (0, -1, -7):
        with pytest.raises(specfun.PoleError):
            specfun.log_gamma(p)


@given(
    a=st.floats(min_value=-3, max_value=3),
    b=st.floats(min_value=-3, max_value=3),
    c=st.floats(min_value=0.3, max_value=6),
    z=st.floats(min_value=-5, max_value=0.9),
)
def test_hyp2f1_against_mpmath(a, b, c, z):
    want = mpmath.hyp2f1(a, b, c, z)
    got = specfun.hyp2f1(a, b, c, z)
    assert got == pytest.approx(float(want), rel=1e-9, abs=1e-11 * max(1.0, abs(float(want))))


@pytest.mark.parametrize("k", [2, 10, 50, 200])
@pytest.mark.parametrize("tau", [0.1, 0.5, 0.95])
def test_hyp2f1_terminating_pfaff_cases(k, tau):
    # the shape used by the exact expected count
    got = specfun.hyp2f1(0.5, -2 * k, 0.5 - 2 * k, tau)
    with mpmath.workdps(60):
        want = mpmath.hyp2f1(0.5, -2 * k, 0.5 - 2 * k, tau)
    assert got == pytest.approx(float(want), rel=1e-12)


def test_hyp2f1_regularized_at_pole_of_c():
    # 2F1(a,b;c;z)/Gamma(c) is finite as c -> -n; compare with mpmath's regularized value
    got = float(specfun.hyp2f1_regularized(0.5, 1.5, -2.5, -0.3))
    want = float(mpmath.hyp2f1(0.5, 1.5, -2.5, -0.3) / mpmath.gamma(-2.5))
    assert got == pytest.approx(want, rel=1e-12)


def test_hyp2f1_no_convergent_path():
    with pytest.raises(specfun.NoConvergentPathError):
        specfun.hyp2f1(0.3, 0.4, 1.7, 3.0)


def test_hyp2f1_term_cap_reported():
    with pytest.raises(specfun.SeriesConvergenceError):
        specfun.hyp2f1(0.3, 0.4, 1.7, 0.5, max_terms=3)


@given(k=st.integers(0, 60), x=st.floats(min_value=-30, max_value=30))
def test_hermite_against_mpmath(k, x):
    got = specfun.hermite_scaled(k, x)
    want = mpmath.hermite(k, x)
    if want == 0:
        assert got.sign == 0 or abs(float(got)) < 1e-8
        return
    assume(abs(want) > 1e-200)
    # compare in units of the natural size sqrt(2^k k!) e^{x^2/2}
    scale = mpmath.log(mpmath.sqrt(mpmath.factorial(k)) * 2 ** (k / 2) * mpmath.exp(x * x / 2))
    ratio = got.sign * mpmath.exp(got.log_mag - scale) - want * mpmath.exp(-scale)
    assert abs(ratio) < 1e-10


def test_hermite_huge_degree_stays_finite():
    h = specfun.hermite_scaled(3000, 10.0)
    assert math.isfinite(h.log_mag) and h.log_mag > 700
