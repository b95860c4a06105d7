"""Regression error and agreement metrics."""

from __future__ import annotations

import numpy as np

from ..errors import DataError, ShapeError


def _pair(pred, truth, min_len=1):
    a = np.asarray(pred, dtype=float).ravel()
    b = np.asarray(truth, dtype=float).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < min_len:
        raise DataError(f"need at least {min_len} values")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DataError("non-finite values")
    return a, b


def rmse(pred, truth) -> float:
    a, b = _pair(pred, truth)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def mae(pred, truth) -> float:
    a, b = _pair(pred, truth)
    return float(np.mean(np.abs(a - b)))


def pearson(a, b) -> float:
    a, b = _pair(a, b, 2)
    ac = a - a.mean()
    bc = b - b.mean()
    den = np.sqrt(np.dot(ac, ac) * np.dot(bc, bc))
    return float(np.dot(ac, bc) / den) if den > 0 else 0.0


def ccc(a, b) -> float:
    """Concordance correlation coefficient with population moments.

    Returns 0 when the denominator vanishes (both inputs constant and equal).
    """
    a, b = _pair(a, b, 2)
    ma, mb = a.mean(), b.mean()
    va = np.mean((a - ma) ** 2)
    vb = np.mean((b - mb) ** 2)
    cov = np.mean((a - ma) * (b - mb))
    den = va + vb + (ma - mb) ** 2
    if den <= 0:
        return 0.0
    return float(np.clip(2.0 * cov / den, -1.0, 1.0))
