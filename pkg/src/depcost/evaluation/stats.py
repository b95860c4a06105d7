"""Two-sample t-test and Wilcoxon signed-rank test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..special import normal_sf, student_t_two_sided

# above this many nonzero differences the normal approximation is used
EXACT_MAX_N = 25


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p: float
    degenerate: bool = False


@dataclass(frozen=True)
class WilcoxonResult:
    W: float
    p: float
    bonferroni_p: float
    n: int
    method: str
    degenerate: bool = False


def ttest_two_sample(a, b) -> TTestResult:
    """Pooled-variance Student t-test, df = n1 + n2 - 2, two-sided p."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise DataError("each sample needs at least 2 values")
    df = n1 + n2 - 2
    ss = np.sum((a - a.mean()) ** 2) + np.sum((b - b.mean()) ** 2)
    sp2 = ss / df
    diff = a.mean() - b.mean()
    if sp2 <= 0:
        if diff == 0:
            return TTestResult(0.0, df, 1.0, degenerate=True)
        return TTestResult(math.copysign(math.inf, diff), df, 0.0, degenerate=True)
    t = diff / math.sqrt(sp2 * (1.0 / n1 + 1.0 / n2))
    return TTestResult(float(t), df, float(student_t_two_sided(t, df)))


def average_ranks(x) -> np.ndarray:
    """1-based ranks, ties receive the mean of the positions they occupy."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x))
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _exact_two_sided(ranks: np.ndarray, w_plus: float) -> float:
    """P(min(W+, W-) <= observed min) under random signs, by counting subsets.

    Ranks are doubled so tied (half-integer) ranks stay integral.
    """
    r2 = np.rint(2 * ranks).astype(int)
    total = int(r2.sum())
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in r2:
        for s in range(total, r - 1, -1):
            counts[s] += counts[s - r]
    n_sub = 2 ** len(r2)
    w = min(int(round(2 * w_plus)), total - int(round(2 * w_plus)))
    # distribution of W+ is symmetric about total/2
    tail = sum(counts[:w + 1])
    p = 2.0 * tail / n_sub
    return min(1.0, float(p))


def wilcoxon_signed_rank(before, after, m_tests: int = 1) -> WilcoxonResult:
    """Paired signed-rank test; zero differences are dropped, ties get average ranks.

    W = min(W+, W-). The p-value is exact for n <= 25 nonzero differences and
    otherwise uses a normal approximation with tie-corrected variance and a
    continuity correction.
    """
    x = np.asarray(before, dtype=float)
    y = np.asarray(after, dtype=float)
    if x.shape != y.shape:
        raise DataError("paired samples must have equal length")
    d = y - x
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return WilcoxonResult(0.0, 1.0, 1.0, 0, "none", degenerate=True)
    ranks = average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    W = min(w_plus, w_minus)
    if n <= EXACT_MAX_N:
        p = _exact_two_sided(ranks, w_plus)
        method = "exact"
    else:
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts ** 3 - tie_counts) / 48.0
        if var <= 0:
            return WilcoxonResult(W, 1.0, 1.0, n, "normal", degenerate=True)
        z = (abs(w_plus - mean) - 0.5) / math.sqrt(var)
        p = min(1.0, 2.0 * normal_sf(max(z, 0.0)))
        method = "normal"
    return WilcoxonResult(W, float(p), min(1.0, p * m_tests), n, method)


def bonferroni(p: float, m_tests: int) -> float:
    return min(1.0, p * m_tests)
