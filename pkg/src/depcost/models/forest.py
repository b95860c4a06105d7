"""Random-forest regression: bagged CART trees grown by variance reduction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import DataError, ShapeError

LEAF = -1
# depth used when max_depth is None
UNLIMITED = 1 << 30


@njit(cache=True)
def _best_split(X, y, rows, feat):
    """Best threshold on one feature by weighted-variance reduction.

    Returns (gain, threshold, n_left); gain is the decrease in the sum of
    squared deviations. gain < 0 means no valid split (constant feature).
    """
    n = rows.shape[0]
    vals = np.empty(n)
    for a in range(n):
        vals[a] = X[rows[a], feat]
    order = np.argsort(vals, kind="mergesort")
    total = 0.0
    total_sq = 0.0
    for a in range(n):
        v = y[rows[a]]
        total += v
        total_sq += v * v
    parent = total_sq - total * total / n
    best_gain = -1.0
    best_thr = 0.0
    best_left = 0
    left = 0.0
    left_sq = 0.0
    for a in range(n - 1):
        v = y[rows[order[a]]]
        left += v
        left_sq += v * v
        x0 = vals[order[a]]
        x1 = vals[order[a + 1]]
        if x1 <= x0:
            continue
        nl = a + 1
        nr = n - nl
        right = total - left
        right_sq = total_sq - left_sq
        sse = (left_sq - left * left / nl) + (right_sq - right * right / nr)
        gain = parent - sse
        if gain > best_gain:
            best_gain = gain
            best_thr = 0.5 * (x0 + x1)
            if best_thr >= x1:
                best_thr = x0
            best_left = nl
    return best_gain, best_thr, best_left


@njit(cache=True)
def _grow(X, y, sample_rows, max_depth, min_leaf, max_features, seed):
    np.random.seed(seed)
    n, p = X.shape
    cap = 2 * sample_rows.shape[0] + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)
    n_nodes = 1
    # explicit stack of (node, start, stop, depth) over a working index array
    work = sample_rows.copy()
    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_stop = np.empty(cap, dtype=np.int64)
    stack_depth = np.empty(cap, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_stop[0] = work.shape[0]
    stack_depth[0] = 0
    top = 1
    feats = np.arange(p)
    while top > 0:
        top -= 1
        node = stack_node[top]
        a = stack_start[top]
        b = stack_stop[top]
        depth = stack_depth[top]
        rows = work[a:b]
        m = b - a
        mean = 0.0
        for r in range(m):
            mean += y[rows[r]]
        mean /= m
        value[node] = mean
        if depth >= max_depth or m < 2 * min_leaf:
            continue
        # sample candidate features without replacement until max_features
        # non-constant ones have been evaluated (or all are exhausted)
        for q in range(p):
            feats[q] = q
        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        visited = 0
        remaining = p
        while remaining > 0 and visited < max_features:
            k = np.random.randint(0, remaining)
            f = feats[k]
            feats[k] = feats[remaining - 1]
            feats[remaining - 1] = f
            remaining -= 1
            gain, thr, nl = _best_split(X, y, rows, f)
            if gain < 0:
                continue
            visited += 1
            if nl < min_leaf or m - nl < min_leaf:
                continue
            if gain > best_gain + 1e-12 * abs(best_gain) and gain > 1e-12:
                best_gain = gain
                best_feat = f
                best_thr = thr
        if best_feat < 0:
            continue
        # partition rows in place
        lo = a
        hi = b - 1
        while lo <= hi:
            if X[work[lo], best_feat] <= best_thr:
                lo += 1
            else:
                tmp = work[lo]
                work[lo] = work[hi]
                work[hi] = tmp
                hi -= 1
        feature[node] = best_feat
        threshold[node] = best_thr
        l_id = n_nodes
        r_id = n_nodes + 1
        n_nodes += 2
        left[node] = l_id
        right[node] = r_id
        stack_node[top] = r_id
        stack_start[top] = lo
        stack_stop[top] = b
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = l_id
        stack_start[top] = a
        stack_stop[top] = lo
        stack_depth[top] = depth + 1
        top += 1
    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy())


@njit(cache=True)
def _tree_predict(X, feature, threshold, left, right, value):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = value[node]
    return out


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        return _tree_predict(X, self.feature, self.threshold, self.left, self.right, self.value)


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    n_features: int
    n_trees: int
    max_depth: int | None
    seed: int
    bootstrap: bool = True
    min_leaf: int = 1

    def tree_predictions(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} columns, got shape {X.shape}")
        return np.stack([t.predict(X) for t in self.trees])

    def predict(self, X) -> np.ndarray:
        return np.mean(self.tree_predictions(X), axis=0)


def tree_seeds(seed: int, n_trees: int) -> np.ndarray:
    """Per-tree seeds derived from the forest seed (independent of scheduling)."""
    return np.random.SeedSequence(seed).generate_state(n_trees, dtype=np.uint32)


def forest_fit(X, y, n_trees: int = 100, max_depth: int | None = None, seed: int = 0,
               bootstrap: bool = True, min_leaf: int = 1,
               max_features: int | None = None) -> ForestModel:
    """Bagged regression trees; each split considers max(1, floor(p/3)) random features."""
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError("X must be 2-D with one row per target")
    if len(y) < 2:
        raise DataError("need at least 2 training rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("non-finite training data")
    if n_trees < 1 or min_leaf < 1:
        raise ValueError("n_trees and min_leaf must be >= 1")
    if max_depth is not None and max_depth < 0:
        raise ValueError("max_depth must be >= 0 or None")
    n, p = X.shape
    mtry = max_features if max_features is not None else max(1, p // 3)
    depth = UNLIMITED if max_depth is None else int(max_depth)
    trees = []
    for ts in tree_seeds(seed, n_trees):
        if bootstrap:
            rows = np.random.default_rng(int(ts)).integers(0, n, size=n)
        else:
            rows = np.arange(n)
        parts = _grow(X, y, rows.astype(np.int64), depth, min_leaf, mtry, int(ts))
        trees.append(Tree(*parts))
    return ForestModel(tuple(trees), p, n_trees, max_depth, seed, bootstrap, min_leaf)
