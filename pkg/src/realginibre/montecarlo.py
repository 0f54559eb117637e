"""Monte Carlo sampling of real elliptic matrices and their spectra."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy import special as sp

from .density import in_ellipse
from .expected import RegimeParam

__all__ = [
    "EnsembleSpec",
    "SpectrumSample",
    "ExperimentStats",
    "sample_matrix",
    "spectrum",
    "real_counts",
    "run_experiment",
    "ellipse_fraction",
    "histogram_tv",
    "DISTRIBUTIONS",
]

DISTRIBUTIONS = ("gaussian", "uniform", "rademacher")
_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class EnsembleSpec:
    N: int
    regime: RegimeParam
    dist: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if self.dist not in DISTRIBUTIONS:
            raise ValueError(f"dist must be one of {DISTRIBUTIONS}, got {self.dist!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.regime.mode == "alpha" and self.regime.N != self.N:
            raise ValueError("alpha-mode regime must carry the same N")

    @property
    def tau(self) -> float:
        return self.regime.tau_n


def _generator(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def _pairs(rng: np.random.Generator, dist: str, tau: float, n: int):
    """``n`` pairs with zero mean, unit variance and correlation ``tau``."""
    if dist == "gaussian":
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        return z1, tau * z1 + math.sqrt(max(0.0, 1 - tau * tau)) * z2
    if dist == "rademacher":
        s = rng.integers(0, 2, n) * 2.0 - 1.0
        keep = rng.random(n) < (1 + tau) / 2
        return s, np.where(keep, s, -s)
    # Gaussian copula: uniform marginals have correlation (6/pi) asin(rho/2)
    rho = 2 * math.sin(math.pi * tau / 6)
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + math.sqrt(max(0.0, 1 - rho * rho)) * rng.standard_normal(n)
    return _SQRT3 * sp.erf(z1 / math.sqrt(2)), _SQRT3 * sp.erf(z2 / math.sqrt(2))


def _single(rng: np.random.Generator, dist: str, tau: float, N: int) -> np.ndarray:
    if dist == "gaussian":
        # X = sqrt((1+tau)/2) S + sqrt((1-tau)/2) A, S ~ GOE, A ~ anti-symmetric GOE
        g = rng.standard_normal((N, N))
        h = rng.standard_normal((N, N))
        s = (g + g.T) / math.sqrt(2 * N)
        a = (h - h.T) / math.sqrt(2 * N)
        return math.sqrt((1 + tau) / 2) * s + math.sqrt((1 - tau) / 2) * a
    iu = np.triu_indices(N, 1)
    x = np.empty((N, N))
    upper, lower = _pairs(rng, dist, tau, iu[0].size)
    x[iu] = upper
    x[iu[1], iu[0]] = lower
    if dist == "rademacher":
        diag = rng.integers(0, 2, N) * 2.0 - 1.0
    else:
        diag = rng.uniform(-_SQRT3, _SQRT3, N)
    x[np.diag_indices(N)] = diag
    return x / math.sqrt(N)


def sample_matrix(spec: EnsembleSpec, index: int = 0) -> np.ndarray:
    """The ``index``-th matrix of the experiment described by ``spec``.

    Every index draws from its own Philox substream keyed by ``(seed, index)``.
    """
    return _single(_generator(spec.seed, index), spec.dist, spec.tau, spec.N)


@dataclass
class SpectrumSample:
    real_eigs: np.ndarray
    complex_pairs: np.ndarray  # rows (a, b) with b > 0 for a +- ib
    real_count: int

    def __post_init__(self):
        n = self.real_count + 2 * len(self.complex_pairs)
        if self.real_count != len(self.real_eigs):
            raise ValueError("real_count disagrees with real_eigs")
        self.N = n

    def complex_eigs(self) -> np.ndarray:
        if len(self.complex_pairs) == 0:
            return np.empty(0, dtype=complex)
        a, b = self.complex_pairs[:, 0], self.complex_pairs[:, 1]
        return np.concatenate([a + 1j * b, a - 1j * b])


def spectrum(matrix) -> SpectrumSample:
    """Real and complex eigenvalues read off the real Schur form.

    A 1x1 diagonal block is a real eigenvalue and a 2x2 block with nonzero
    subdiagonal a complex pair; no tolerance is involved.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    n = m.shape[0]
    try:
        t, _ = sla.schur(m, output="real")
    except sla.LinAlgError:
        # retry on an explicitly balanced copy
        b, _ = sla.matrix_balance(m, permute=True, scale=True)
        t, _ = sla.schur(b, output="real")
    reals = []
    pairs = []
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            a = 0.5 * (t[i, i] + t[i + 1, i + 1])
            d = 0.5 * (t[i, i] - t[i + 1, i + 1])
            b = math.sqrt(max(0.0, -(d * d + t[i, i + 1] * t[i + 1, i])))
            pairs.append((a, b))
            i += 2
        else:
            reals.append(t[i, i])
            i += 1
    reals = np.sort(np.array(reals))
    return SpectrumSample(reals, np.array(pairs).reshape(-1, 2), len(reals))


def real_counts(batch: np.ndarray):
    """Real eigenvalues of a stack of matrices via batched LAPACK ``geev``.

    ``geev`` reduces to real Schur form and reports ``wi == 0`` exactly for
    1x1 blocks, so the classification is structural as in :func:`spectrum`.
    Returns ``(counts, list of real-eigenvalue arrays, list of complex arrays)``.
    """
    w = np.linalg.eigvals(batch)
    if not np.iscomplexobj(w):
        w = w.astype(complex)
    is_real = w.imag == 0.0
    counts = is_real.sum(axis=-1)
    reals = [np.sort(row.real[mask]) for row, mask in zip(w, is_real)]
    cplx = [row[~mask] for row, mask in zip(w, is_real)]
    return counts, reals, cplx


@dataclass
class ExperimentStats:
    N: int
    tau: float
    dist: str
    seed: int
    n_samples: int
    count_mean: float
    count_variance: float
    counts: np.ndarray
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    hist_below: int
    hist_above: int
    complex_scatter: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))
    parity_ok: bool = True

    @property
    def stderr(self) -> float:
        return math.sqrt(self.count_variance / self.n_samples) if self.n_samples > 1 else float("nan")

    @property
    def total_real(self) -> int:
        return int(self.counts.sum())

    def hist_density(self) -> np.ndarray:
        """Histogram normalised by all observed real eigenvalues."""
        widths = np.diff(self.hist_edges)
        return self.hist_counts / (self.total_real * widths)

    def to_dict(self) -> dict:
        return {
            "n": int(self.N),
            "tau": float(self.tau),
            "dist": self.dist,
            "seed": int(self.seed),
            "n_samples": int(self.n_samples),
            "count_mean": float(self.count_mean),
            "count_variance": float(self.count_variance),
            "count_stderr": float(self.stderr) if self.n_samples > 1 else None,
            "mean_over_n": float(self.count_mean / self.N),
            "variance_over_mean": float(self.count_variance / self.count_mean) if self.count_mean > 0 else None,
            "parity_ok": bool(self.parity_ok),
            "histogram": {
                "edges": [float(e) for e in self.hist_edges],
                "counts": [int(c) for c in self.hist_counts],
                "below": int(self.hist_below),
                "above": int(self.hist_above),
            },
        }

    def hist_csv(self) -> str:
        lines = ["bin_lo,bin_hi,count"]
        for lo, hi, c in zip(self.hist_edges[:-1], self.hist_edges[1:], self.hist_counts):
            lines.append(f"{lo:.17g},{hi:.17g},{int(c)}")
        return "\n".join(lines) + "\n"

    def scatter_csv(self) -> str:
        lines = ["re,im"] + [f"{z.real:.17g},{z.imag:.17g}" for z in self.complex_scatter]
        return "\n".join(lines) + "\n"


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("RGINIBRE_THREADS", "1") or 1)
    return max(1, int(threads))


def _chunk(spec: EnsembleSpec, start: int, stop: int, keep_scatter: bool):
    batch = np.stack([sample_matrix(spec, i) for i in range(start, stop)])
    counts, reals, cplx = real_counts(batch)
    return counts, reals, (cplx if keep_scatter else None)


def run_experiment(
    spec: EnsembleSpec,
    n_samples: int,
    bins: int = 20,
    hist_range: tuple = (-2.2, 2.2),
    scatter_limit: int = 0,
    threads: int | None = None,
    chunk: int = 500,
) -> ExperimentStats:
    """Sample ``n_samples`` matrices and aggregate real-eigenvalue statistics.

    Results depend only on ``spec`` and ``n_samples``: chunks may run on
    several threads but are reduced in index order.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    starts = list(range(0, n_samples, chunk))
    jobs = [(s, min(s + chunk, n_samples)) for s in starts]
    keep = scatter_limit > 0
    workers = _threads(threads)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda j: _chunk(spec, j[0], j[1], keep), jobs))
    else:
        results = [_chunk(spec, a, b, keep) for a, b in jobs]

    counts = np.concatenate([r[0] for r in results]).astype(np.int64)
    edges = np.linspace(hist_range[0], hist_range[1], bins + 1)
    hist = np.zeros(bins, dtype=np.int64)
    below = above = 0
    for _, reals, _ in results:
        for r in reals:
            hist += np.histogram(r, edges)[0]
            below += int(np.sum(r < edges[0]))
            above += int(np.sum(r > edges[-1]))
    scatter = np.empty(0, dtype=complex)
    if keep:
        pts = np.concatenate([z for r in results for z in r[2]]) if results else scatter
        if pts.size > scatter_limit:
            step = int(math.ceil(pts.size / scatter_limit))
            pts = pts[::step]
        scatter = pts
    mean = float(counts.mean())
    var = float(counts.var(ddof=1)) if n_samples > 1 else 0.0
    parity = bool(np.all((counts - spec.N) % 2 == 0) and np.all((counts >= 0) & (counts <= spec.N)))
    return ExperimentStats(
        spec.N, spec.tau, spec.dist, spec.seed, n_samples, mean, var, counts,
        edges, hist, below, above, scatter, parity,
    )


def ellipse_fraction(sample: SpectrumSample, tau: float, inflate: float = 0.02) -> float:
    """Share of complex eigenvalues inside the elliptic-law support inflated by ``inflate``."""
    z = sample.complex_eigs()
    if z.size == 0:
        return 1.0
    return float(np.mean(in_ellipse(z, tau, inflate)))


def histogram_tv(stats: ExperimentStats, density) -> float:
    """Total-variation distance between the binned sample and a reference density.

    Eigenvalues outside the histogram range count as mass the reference
    density does not place there.
    """
    from .quadrature import gauss_kronrod

    edges = stats.hist_edges
    ref = gauss_kronrod(lambda x: density(x), edges[:-1], edges[1:], abstol=1e-12, reltol=1e-10)
    emp = stats.hist_counts / stats.total_real
    outside_emp = (stats.hist_below + stats.hist_above) / stats.total_real
    outside_ref = max(0.0, 1.0 - float(ref.sum()))
    return 0.5 * (float(np.abs(emp - ref).sum()) + abs(outside_emp - outside_ref))
