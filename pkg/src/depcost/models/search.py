"""Model-family registry and subject-independent grid search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from .fnn import FnnConfig, FnnModel, fnn_fit
from .forest import ForestModel, forest_fit
from .svr import SvrModel, svr_fit

FAMILIES = ("svr", "forest", "fnn")

DEFAULT_GRIDS = {
    "svr": {"C": [0.1, 1.0, 10.0, 100.0], "gamma": [1e-4, 1e-3, 1e-2, 1e-1], "epsilon": [0.1]},
    "forest": {"n_trees": [100, 300], "max_depth": [8, 16, None]},
    "fnn": {"epochs": [150], "batch_size": [32], "dropout": [0.3], "learning_rate": [1e-3]},
}


def expand_grid(grid: dict) -> list[dict]:
    """Cartesian product in key order; the last key varies fastest."""
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


@dataclass
class GridSearchPlan:
    grids: dict = field(default_factory=lambda: {k: dict(v) for k, v in DEFAULT_GRIDS.items()})
    inner_folds: int = 5
    scoring: str = "rmse"
    seed: int = 0

    def points(self, family: str) -> list[dict]:
        pts = expand_grid(self.grids[family])
        if not pts:
            raise ValueError(f"empty grid for {family}")
        return pts


def fit_family(family: str, X, y, params: dict, seed: int = 0):
    """Train one model of ``family`` with hyperparameters ``params``."""
    if family == "svr":
        return svr_fit(X, y, C=params.get("C", 1.0), gamma=params.get("gamma", 0.1),
                       epsilon=params.get("epsilon", 0.1))
    if family == "forest":
        return forest_fit(X, y, n_trees=int(params.get("n_trees", 100)),
                          max_depth=params.get("max_depth"), seed=seed,
                          bootstrap=params.get("bootstrap", True))
    if family == "fnn":
        known = FnnConfig.__dataclass_fields__
        cfg = FnnConfig(**{k: v for k, v in params.items() if k in known})
        return fnn_fit(X, y, seed=seed, config=cfg)
    raise ValueError(f"unknown model family {family!r}")


def predict(model, X, clamp: tuple[float, float] | None = None) -> np.ndarray:
    """Predictions of any fitted family; optional clamping to ``clamp`` = (lo, hi)."""
    if isinstance(model, SvrModel):
        out = model.decision(X)
    elif isinstance(model, (ForestModel, FnnModel)):
        out = model.predict(X)
    else:
        raise TypeError(f"not a fitted model: {type(model).__name__}")
    if clamp is not None:
        out = np.clip(out, clamp[0], clamp[1])
    return out


@dataclass
class SearchResult:
    best_params: dict
    best_index: int
    points: list[dict]
    # rows = grid points, columns = inner folds
    fold_rmse: np.ndarray

    @property
    def mean_rmse(self) -> np.ndarray:
        return self.fold_rmse.mean(axis=1)


def grid_search(family: str, X, y, plan: GridSearchPlan, groups, seed: int = 0) -> SearchResult:
    """Score every grid point with subject-independent inner folds; keep the lowest mean RMSE.

    A one-point grid is returned without any fitting (its table is NaN).
    Ties go to the earlier grid point.
    """
    from ..evaluation.folds import subject_folds

    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    groups = np.asarray(groups)
    if X.shape[0] != len(y) or len(y) != len(groups):
        raise ShapeError("X, y and groups must align")
    points = plan.points(family)
    k = plan.inner_folds
    table = np.full((len(points), k), np.nan)
    if len(points) == 1:
        return SearchResult(points[0], 0, points, table)

    fold_of = subject_folds(groups, y, k, plan.seed)
    for f in range(k):
        train = fold_of != f
        test = ~train
        for g, params in enumerate(points):
            model = fit_family(family, X[train], y[train], params, seed)
            err = predict(model, X[test]) - y[test]
            table[g, f] = float(np.sqrt(np.mean(err * err)))
    means = table.mean(axis=1)
    best = int(np.argmin(means))
    return SearchResult(points[best], best, points, table)
