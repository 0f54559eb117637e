import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from realginibre import density, montecarlo
from realginibre.expected import RegimeParam, c_alpha, expected_exact
from realginibre.montecarlo import EnsembleSpec, run_experiment, sample_matrix, spectrum
from realginibre.variance import variance_exact


def _spec(N, tau, dist="gaussian", seed=1):
    return EnsembleSpec(N, RegimeParam.from_tau(tau), dist, seed)


def _entry_stats(dist, tau, N=40, reps=200):
    spec = _spec(N, tau, dist)
    iu = np.triu_indices(N, 1)
    up, lo, dg = [], [], []
    for i in range(reps):
        x = sample_matrix(spec, i) * math.sqrt(N)
        up.append(x[iu])
        lo.append(x.T[iu])
        dg.append(np.diag(x))
    return np.concatenate(up), np.concatenate(lo), np.concatenate(dg)


@pytest.mark.parametrize("dist", montecarlo.DISTRIBUTIONS)
@pytest.mark.parametrize("tau", [0.0, 0.5, 0.9])
def test_entry_moments(dist, tau):
    up, lo, dg = _entry_stats(dist, tau)
    n = up.size
    assert abs(up.mean()) < 5 / math.sqrt(n)
    assert up.var() == pytest.approx(1.0, abs=0.03)
    assert np.corrcoef(up, lo)[0, 1] == pytest.approx(tau, abs=0.02)
    diag_var = 1 + tau if dist == "gaussian" else 1.0
    assert dg.var() == pytest.approx(diag_var, rel=0.1)


def test_marginal_supports():
    up, _, _ = _entry_stats("rademacher", 0.3, reps=20)
    assert set(np.unique(up)) == {-1.0, 1.0}
    up, _, dg = _entry_stats("uniform", 0.3, reps=20)
    assert np.abs(up).max() <= math.sqrt(3) and np.abs(dg).max() <= math.sqrt(3)
    # uniform marginals: fourth moment 9/5
    assert np.mean(up**4) == pytest.approx(1.8, rel=0.05)


def test_symmetric_and_antisymmetric_limits():
    x = sample_matrix(_spec(12, 1.0), 0)
    np.testing.assert_allclose(x, x.T)
    s = spectrum(x)
    assert s.real_count == 12
    y = sample_matrix(_spec(12, 0.0), 0)
    assert not np.allclose(y, y.T)


@given(st.integers(0, 2**63), st.integers(0, 1000))
def test_seed_and_index_determine_the_matrix(seed, index):
    spec = _spec(6, 0.4, seed=seed)
    np.testing.assert_array_equal(sample_matrix(spec, index), sample_matrix(spec, index))
    assert not np.array_equal(sample_matrix(spec, index), sample_matrix(spec, index + 1))


@given(st.integers(1, 30), st.floats(0, 1), st.sampled_from(montecarlo.DISTRIBUTIONS), st.integers(0, 50))
def test_parity_and_schur_bulk_agreement(N, tau, dist, index):
    x = sample_matrix(_spec(N, tau, dist), index)
    s = spectrum(x)
    counts, reals, _ = montecarlo.real_counts(x[None])
    assert s.real_count == counts[0]
    assert (N - s.real_count) % 2 == 0
    assert s.N == N
    np.testing.assert_allclose(np.sort(reals[0]), s.real_eigs, atol=1e-8)
    ev = np.sort_complex(np.linalg.eigvals(x))
    got = np.sort_complex(np.concatenate([s.real_eigs.astype(complex), s.complex_eigs()]))
    np.testing.assert_allclose(got, ev, atol=1e-8)


def test_spectrum_rejects_bad_input():
    with pytest.raises(ValueError):
        spectrum(np.ones((2, 3)))
    with pytest.raises(ValueError):
        spectrum(np.array([[np.nan, 0], [0, 1]]))


def test_threads_do_not_change_results():
    spec = EnsembleSpec(16, RegimeParam.from_alpha(1.0, 16), "uniform", 9)
    a = run_experiment(spec, 300, threads=1, chunk=64)
    b = run_experiment(spec, 300, threads=4, chunk=64)
    np.testing.assert_array_equal(a.counts, b.counts)
    np.testing.assert_array_equal(a.hist_counts, b.hist_counts)
    assert a.to_dict() == b.to_dict()


def test_threads_env_variable(monkeypatch):
    monkeypatch.setenv("RGINIBRE_THREADS", "3")
    assert montecarlo._threads(None) == 3
    assert montecarlo._threads(2) == 2


@pytest.mark.parametrize("N,tau", [(2, 0.3), (8, 0.5), (16, 0.9)])
def test_count_moments_match_exact_values(N, tau):
    n = 20_000
    stats = run_experiment(_spec(N, tau, seed=11), n)
    assert stats.parity_ok
    e = expected_exact(N, tau)
    assert abs(stats.count_mean - e) < 4 * stats.stderr
    # standard error of a sample variance from the fourth central moment
    c = stats.counts - stats.count_mean
    se_var = math.sqrt(max(np.mean(c**4) - stats.count_variance**2, 1e-12) / n)
    assert abs(stats.count_variance - variance_exact(N, tau)) < 5 * se_var


@pytest.mark.parametrize("dist", ["uniform", "rademacher"])
def test_universality_of_mean(dist):
    N = 64
    spec = EnsembleSpec(N, RegimeParam.from_alpha(1.0, N), dist, 5)
    stats = run_experiment(spec, 400)
    assert abs(stats.count_mean / N - c_alpha(1.0)) < 4 * stats.stderr / N + 0.02


def test_histogram_close_to_limit_density():
    N = 128
    spec = EnsembleSpec(N, RegimeParam.from_alpha(1.0, N), "gaussian", 3)
    stats = run_experiment(spec, 200)
    tv = montecarlo.histogram_tv(stats, lambda x: density.density_limit_ah(1.0, x))
    assert tv < 0.08
    assert stats.hist_counts.sum() + stats.hist_below + stats.hist_above == stats.total_real


def test_complex_eigenvalues_fill_the_ellipse():
    s = spectrum(sample_matrix(_spec(400, 0.5, seed=2), 0))
    assert montecarlo.ellipse_fraction(s, 0.5) > 0.97


def test_outputs():
    spec = _spec(10, 0.5, seed=4)
    stats = run_experiment(spec, 30, bins=5, scatter_limit=7)
    d = stats.to_dict()
    assert d["n"] == 10 and d["n_samples"] == 30 and len(d["histogram"]["counts"]) == 5
    lines = stats.hist_csv().splitlines()
    assert lines[0] == "bin_lo,bin_hi,count" and len(lines) == 6
    sc = stats.scatter_csv().splitlines()
    assert sc[0] == "re,im" and 1 < len(sc) <= 8
    assert stats.hist_density().shape == (5,)


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(8, RegimeParam.from_tau(0.5), "cauchy")
    with pytest.raises(ValueError):
        EnsembleSpec(8, RegimeParam.from_alpha(1.0, 16))
    with pytest.raises(ValueError):
        EnsembleSpec(0, RegimeParam.from_tau(0.5))
    with pytest.raises(ValueError):
        run_experiment(_spec(4, 0.5), 0)
