import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from realginibre import density
from realginibre.density import DensityCurve
from realginibre.quadrature import composite_gauss_legendre


def _integral(N, tau, lo=-4.0, hi=4.0):
    x, w = composite_gauss_legendre(lo, hi, 200, order=20)
    return float(w @ density.density_exact(N, tau, x))


@pytest.mark.parametrize("N,tau,x", [(4, 0.3, 0.5), (8, 0.4, 0.7), (10, 0.9, -1.3), (16, 0.6, 0.0)])
def test_against_direct_hermite_oracle(N, tau, x):
    from realginibre.expected import expected_exact

    want = float(oracles.density_unnormalised(N, tau, x)) / expected_exact(N, tau)
    assert density.density_exact(N, tau, [x])[0] == pytest.approx(want, rel=1e-11)


@pytest.mark.parametrize("N", [64, 128, 256])
@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_normalised(N, alpha):
    assert _integral(N, 1 - alpha**2 / N) == pytest.approx(1.0, abs=1e-8)


def test_normalised_at_fixed_tau():
    # fixed tau: support is [-(1+tau), 1+tau] in these units, well inside [-4, 4]
    assert _integral(32, 0.5) == pytest.approx(1.0, abs=1e-8)


@given(st.integers(1, 64).map(lambda k: 2 * k), st.floats(0, 0.99), st.floats(0, 3.5))
def test_even_and_nonnegative(N, tau, x):
    v = density.density_exact(N, tau, [-x, x])
    assert np.all(np.isfinite(v)) and v[0] >= 0
    assert v[0] == pytest.approx(v[1], rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("N", [16, 128, 512])
@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_closed_form_at_zero(N, alpha):
    tau = 1 - alpha**2 / N
    assert density.density_at_zero_closed(N, tau) == pytest.approx(density.density_exact(N, tau, [0.0])[0], rel=1e-8)


def test_closed_form_at_zero_fixed_tau():
    for tau in (0.0, 0.5):
        assert density.density_at_zero_closed(40, tau) == pytest.approx(density.density_exact(40, tau, [0.0])[0], rel=1e-10)


@pytest.mark.parametrize("N,alpha", [(64, 1.0), (128, 2.0)])
def test_rho1_integral_route(N, alpha):
    tau = 1 - alpha**2 / N
    x = np.linspace(-2.2, 2.2, 23)
    r1, _, e = density.density_parts(N, tau, x)
    np.testing.assert_allclose(density.density_rho1_integral(N, tau, x), r1 / e, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("N,tau", [(20, 0.5), (128, 0.9), (512, 0.3)])
def test_christoffel_darboux(N, tau):
    for x in (0.3, 1.7, 0.9 * math.sqrt(2 * N)):
        res = density.cd_residual(N, tau, x)
        assert res <= 1e-4 * max(abs(density.cd_rhs(N, tau, x)), 1.0)


def test_limit_density_normalised_and_tends_to_semicircle():
    # x = 2 sin(t) removes the square-root edge behaviour
    t, w = composite_gauss_legendre(-math.pi / 2, math.pi / 2, 64)
    for alpha in (0.5, 1.0, 4.0):
        vals = density.density_limit_ah(alpha, 2 * np.sin(t)) * 2 * np.cos(t)
        assert float(w @ vals) == pytest.approx(1.0, rel=1e-12)
    x, _ = composite_gauss_legendre(-2.0, 2.0, 64)
    small = density.density_limit_ah(1e-3, x)
    np.testing.assert_allclose(small, density.density_semicircle(x), atol=1e-6)


def test_limit_density_flattens_for_large_alpha():
    x = np.linspace(-1.5, 1.5, 7)
    v = density.density_limit_ah(60.0, x)
    np.testing.assert_allclose(v, 0.25, rtol=1e-3)


def test_semicircle_cdf():
    x, w = composite_gauss_legendre(-2.0, 0.7, 40)
    assert float(w @ density.density_semicircle(x)) == pytest.approx(oracles.semicircle_cdf(0.7), rel=1e-6)


def test_uniform_elliptic_and_ellipse():
    v = density.density_uniform_elliptic(0.5, [0.0, 1.49, 1.51])
    np.testing.assert_allclose(v, [1 / 3, 1 / 3, 0.0])
    z = np.array([1.5 + 0j, 0.5j, 1.0 + 0.4j, 1.6 + 0j])
    assert list(density.in_ellipse(z, 0.5)) == [True, True, False, False]
    assert density.in_ellipse(np.array([1.52 + 0j]), 0.5, inflate=0.02)[0]


def test_converges_to_limit_in_sup_norm():
    grid = density.default_grid()
    for alpha in (1.0, 2.0):
        lim = density.density_limit_ah(alpha, grid)
        sups = [np.max(np.abs(density.density_exact(N, 1 - alpha**2 / N, grid) - lim)) for N in (128, 1024)]
        assert sups[1] < sups[0] < 0.05


def test_density_curve_and_csv():
    c = density.density_curve(64, alpha=1.0, grid=np.linspace(-2.5, 2.5, 101))
    assert c.meta["route"] == "exact"
    assert abs(c.integral() - 1) < 1e-3
    lines = c.to_csv().splitlines()
    assert lines[0] == "x,rho,route"
    assert len(lines) == 102 and lines[1].endswith(",exact")
    lim = density.density_curve(alpha=1.0, route="limit")
    assert lim.meta["route"] == "limit"
    sym = density.density_curve(64, tau=1.0)
    np.testing.assert_allclose(sym.values, density.density_semicircle(sym.grid))


def test_density_curve_validation():
    with pytest.raises(ValueError):
        DensityCurve([0, 0], [1, 1])
    with pytest.raises(ValueError):
        DensityCurve([0, 1], [1, -1])
    with pytest.raises(ValueError):
        density.density_exact(4096, 0.5, [0.0])
    with pytest.raises(ValueError):
        density.density_exact(7, 0.5, [0.0])
