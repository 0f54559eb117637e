"""Log-scaled three-term recurrence for normalised Hermite functions.

Every Hermite quantity in the package reduces to

    v_0 = exp(log0),  v_{k+1} = z/sqrt(k+1) * v_k - tau*sqrt(k/(k+1)) * v_{k-1}

evaluated pointwise over an array ``z``.  Mantissas are rescaled whenever they
leave [1e-150, 1e150]; the scale lives in a per-point log.
"""

from __future__ import annotations

import numpy as np

_BIG = 1e150
_SMALL = 1e-150


class HermiteRun:
    """Result of one pass: the final pair, a sum of squares and the log scale.

    True values are ``mantissa * exp(log_scale)`` (squares: ``exp(2*log_scale)``).
    """

    def __init__(self, prev, last, sumsq, log_scale, table=None):
        self.prev = prev
        self.last = last
        self.sumsq = sumsq
        self.log_scale = log_scale
        self.table = table

    def value(self, which: str = "last") -> np.ndarray:
        m = self.last if which == "last" else self.prev
        with np.errstate(over="ignore", under="ignore"):
            return m * np.exp(self.log_scale)

    def log_sumsq(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.sumsq) + 2 * self.log_scale


def run(z, kmax: int, tau: float, log0=0.0, sumsq_upto: int | None = None, keep_table: bool = False) -> HermiteRun:
    """Advance the recurrence to index ``kmax``.

    ``prev``/``last`` are indices ``kmax-1``/``kmax``.  ``sumsq`` covers indices
    ``0..sumsq_upto`` (default ``kmax``).  With ``keep_table`` every row is
    stored as a true float value (rows underflow harmlessly to zero).
    """
    z = np.asarray(z, dtype=float)
    log_scale = np.broadcast_to(np.asarray(log0, dtype=float), z.shape).copy()
    if sumsq_upto is None:
        sumsq_upto = kmax
    prev = np.zeros_like(z)
    cur = np.ones_like(z)
    sumsq = np.ones_like(z) if sumsq_upto >= 0 else np.zeros_like(z)
    table = None
    if keep_table:
        table = np.empty((kmax + 1,) + z.shape)
        with np.errstate(under="ignore"):
            table[0] = np.exp(log_scale)
    for k in range(kmax):
        nxt = z * (1.0 / np.sqrt(k + 1.0)) * cur - tau * np.sqrt(k / (k + 1.0)) * prev
        prev, cur = cur, nxt
        if k + 1 <= sumsq_upto:
            sumsq = sumsq + cur * cur
        mag = np.maximum(np.abs(prev), np.abs(cur))
        # shrinking is only safe while the running sum of squares cannot overflow
        small = (mag < _SMALL) & (mag > 0)
        tiny = small & (np.sqrt(sumsq) * _SMALL < mag * 1e75) if small.any() else small
        bad = (mag > _BIG) | tiny
        if bad.any():
            m = np.where(bad, mag, 1.0)
            prev = prev / m
            cur = cur / m
            sumsq = sumsq / (m * m)
            log_scale = log_scale + np.log(m)
        if keep_table:
            with np.errstate(over="ignore", under="ignore"):
                table[k + 1] = cur * np.exp(log_scale)
    if kmax == 0:
        prev = np.zeros_like(z)
    return HermiteRun(prev, cur, sumsq, log_scale, table)
