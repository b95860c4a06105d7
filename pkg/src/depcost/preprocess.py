"""Z-score standardization fitted on training rows, and greedy mRMR selection."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, ShapeError, UndefinedRelevanceError

CONSTANT_SIGMA = 1e-12
# redundancy floor for the quotient scheme
REDUNDANCY_FLOOR = 1e-5


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray
    names: tuple[str, ...] = ()

    @property
    def n_features(self) -> int:
        return len(self.mean)


def fit_standardizer(train, names=None) -> Standardizer:
    """Per-column mean and population standard deviation of the training rows."""
    X = np.asarray(train, dtype=float)
    if X.ndim != 2:
        raise ShapeError("training matrix must be 2-D")
    if X.shape[0] < 2:
        raise InsufficientDataError("need at least 2 training rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    constant = std < CONSTANT_SIGMA
    names = tuple(names) if names is not None else tuple(f"f{i}" for i in range(X.shape[1]))
    return Standardizer(mean, std, constant, names)


def transform(std: Standardizer, rows) -> np.ndarray:
    """y = (x - mean) / std per column; constant columns map to 0."""
    X = np.asarray(rows, dtype=float)
    if X.ndim != 2 or X.shape[1] != std.n_features:
        raise ShapeError(f"expected {std.n_features} columns, got shape {X.shape}")
    safe = np.where(std.constant, 1.0, std.std)
    Y = (X - std.mean) / safe
    Y[:, std.constant] = 0.0
    return Y


def save_standardizer(path, std: Standardizer) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "mu", "sigma"])
        for name, mu, sigma in zip(std.names, std.mean, std.std):
            w.writerow([name, repr(float(mu)), repr(float(sigma))])
    os.replace(tmp, path)


def load_standardizer(path) -> Standardizer:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = list(reader)
    mean = np.array([float(r[1]) for r in rows])
    sd = np.array([float(r[2]) for r in rows])
    return Standardizer(mean, sd, sd < CONSTANT_SIGMA, tuple(r[0] for r in rows))


@dataclass(frozen=True)
class SelectionResult:
    indices: tuple[int, ...]
    names: tuple[str, ...]
    relevance: tuple[float, ...]
    redundancy: tuple[float, ...]
    scores: tuple[float, ...]
    target_fraction: float
    scheme: str = "difference"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.indices)


def abs_correlations(X: np.ndarray, v: np.ndarray) -> np.ndarray:
    """|Pearson r| between every column of X and vector v (0 where undefined)."""
    Xc = X - X.mean(axis=0)
    vc = v - v.mean()
    num = Xc.T @ vc
    den = np.sqrt(np.sum(Xc * Xc, axis=0) * np.dot(vc, vc))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, num / den, 0.0)
    return np.minimum(np.abs(r), 1.0)


def selection_size(p: int, fraction: float) -> int:
    # round away float noise such as 0.1 * 30 = 3.0000000000000004
    return max(1, min(p, math.ceil(round(fraction * p, 9))))


def mrmr_select(matrix, target, fraction: float = 0.10, names=None,
                scheme: str = "difference") -> SelectionResult:
    """Greedy forward minimum-redundancy maximum-relevance selection.

    Relevance is |Pearson r| with the target, redundancy the mean |Pearson r|
    with the features already chosen. The first pick maximizes relevance.
    Later picks maximize ``relevance - redundancy`` (``scheme="difference"``)
    or ``relevance / redundancy`` (``scheme="quotient"``). Ties go to the
    lower column index.
    """
    X = np.asarray(matrix, dtype=float)
    y = np.asarray(target, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise ShapeError("matrix rows must match target length")
    if not np.all(np.isfinite(y)):
        raise UndefinedRelevanceError("target contains non-finite values")
    if np.std(y) == 0:
        raise UndefinedRelevanceError("target has zero variance")
    if scheme not in ("difference", "quotient"):
        raise ValueError(f"unknown scheme {scheme!r}")
    p = X.shape[1]
    names = tuple(names) if names is not None else tuple(f"f{i}" for i in range(p))
    k = selection_size(p, fraction)

    relevance = abs_correlations(X, y)
    red_sum = np.zeros(p)
    available = np.ones(p, dtype=bool)
    chosen, rel_out, red_out, score_out = [], [], [], []
    for step in range(k):
        if step == 0:
            redundancy = np.ones(p)
            score = relevance.copy()
        else:
            redundancy = red_sum / step
            if scheme == "difference":
                score = relevance - redundancy
            else:
                score = relevance / np.maximum(redundancy, REDUNDANCY_FLOOR)
        score = np.where(available, score, -np.inf)
        j = int(np.argmax(score))
        chosen.append(j)
        rel_out.append(float(relevance[j]))
        red_out.append(float(redundancy[j]))
        score_out.append(float(score[j]))
        available[j] = False
        if step + 1 < k:
            red_sum += abs_correlations(X, X[:, j])
    return SelectionResult(
        indices=tuple(chosen),
        names=tuple(names[j] for j in chosen),
        relevance=tuple(rel_out),
        redundancy=tuple(red_out),
        scores=tuple(score_out),
        target_fraction=fraction,
        scheme=scheme,
    )


def save_selection(path, result: SelectionResult) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("".join(f"{n}\n" for n in result.names))
    os.replace(tmp, path)


def load_selection(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip()]
