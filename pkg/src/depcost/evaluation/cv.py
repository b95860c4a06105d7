"""Nested subject-independent cross-validation for one model family."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, FoldError, LeakageError, ShapeError
from ..models.search import GridSearchPlan, fit_family, grid_search, predict
from ..preprocess import fit_standardizer, mrmr_select, transform
from .folds import plan_subject_folds, subject_severity
from .metrics import ccc, mae, rmse


@dataclass
class CvConfig:
    k: int = 5
    seed: int = 0
    selection_fraction: float = 0.10
    mrmr_scheme: str = "difference"
    gender_mode: str = "separate"
    plan: GridSearchPlan = field(default_factory=GridSearchPlan)
    clamp: bool = False

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.gender_mode not in ("separate", "sliced"):
            raise ValueError(f"unknown gender_mode {self.gender_mode!r}")


@dataclass
class FeatureTable:
    ids: list[str]
    names: list[str]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.shape != (len(self.ids), len(self.names)):
            raise ShapeError("feature table shape does not match ids and names")

    def rows_for(self, sample_ids) -> np.ndarray:
        pos = {sid: i for i, sid in enumerate(self.ids)}
        missing = [s for s in sample_ids if s not in pos]
        if missing:
            raise DataError(f"no features for {len(missing)} samples, e.g. {missing[0]}")
        return self.matrix[[pos[s] for s in sample_ids]]


class FitGuard:
    """Refuses any fitting stage that sees a held-out sample id."""

    def __init__(self, held_out):
        self.held_out = frozenset(held_out)

    def check(self, train_ids, stage: str) -> None:
        leaked = self.held_out.intersection(train_ids)
        if leaked:
            raise LeakageError(f"{stage}: {len(leaked)} held-out samples in the fit set, e.g. {sorted(leaked)[0]}")


@dataclass
class FittedPipeline:
    standardizer: object
    selection: object
    search: object
    model: object
    family: str

    def predict(self, X, clamp=None) -> np.ndarray:
        Z = transform(self.standardizer, X)[:, list(self.selection.indices)]
        return predict(self.model, Z, clamp)


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def fit_pipeline(family: str, X, y, train_ids, groups, cfg: CvConfig, guard: FitGuard,
                 seed: int, names=None, timings: dict | None = None) -> FittedPipeline:
    """Standardize, select, tune and train on the given rows only."""
    timings = timings if timings is not None else {}
    t0 = time.perf_counter()
    guard.check(train_ids, "standardizer")
    std = fit_standardizer(X, names)
    Z = transform(std, X)
    guard.check(train_ids, "mrmr")
    sel = mrmr_select(Z, y, cfg.selection_fraction, names, cfg.mrmr_scheme)
    Zs = Z[:, list(sel.indices)]
    t1 = time.perf_counter()
    guard.check(train_ids, "grid_search")
    search = grid_search(family, Zs, y, cfg.plan, groups, seed)
    guard.check(train_ids, "model")
    model = fit_family(family, Zs, y, search.best_params, seed)
    t2 = time.perf_counter()
    timings["preprocessing"] = timings.get("preprocessing", 0.0) + (t1 - t0)
    timings["model_training"] = timings.get("model_training", 0.0) + (t2 - t1)
    return FittedPipeline(std, sel, search, model, family)


def split_indices(fold_of: np.ndarray, f: int) -> tuple[np.ndarray, np.ndarray]:
    return np.flatnonzero(fold_of != f), np.flatnonzero(fold_of == f)


def _summary(pred, truth) -> dict:
    return {"n": int(len(truth)), "rmse": rmse(pred, truth), "mae": mae(pred, truth)}


@dataclass
class CvResult:
    family: str
    sample_ids: list[str]
    truth: np.ndarray
    prediction: np.ndarray
    fold: np.ndarray
    group: list[str]
    fold_rows: list[dict]
    timings: dict
    # (group, fold, FittedPipeline) triples
    pipelines: list = field(default_factory=list)

    @property
    def abs_error(self) -> np.ndarray:
        return np.abs(self.prediction - self.truth)


def _run_group(family, table, meta, idx, cfg, group_name, timings, fold_rows, out_pred, out_fold,
               pipelines):
    ids = [meta[i].sample_id for i in idx]
    subjects = [meta[i].subject_id for i in idx]
    y = np.array([meta[i].phq8 for i in idx], dtype=float)
    X = table.rows_for(ids)
    uniq, sev = subject_severity(subjects, y)
    if len(uniq) < cfg.k:
        raise FoldError(f"group {group_name!r} has {len(uniq)} subjects, fewer than k={cfg.k}")
    plan = plan_subject_folds(uniq, sev, cfg.k, cfg.seed)
    fold_of = plan.sample_folds(subjects)
    subj = np.array(subjects)
    clamp = (0.0, 24.0) if cfg.clamp else None
    for f in range(cfg.k):
        train, test = split_indices(fold_of, f)
        guard = FitGuard(ids[i] for i in test)
        pipe = fit_pipeline(family, X[train], y[train], [ids[i] for i in train], subj[train],
                            cfg, guard, derive_seed(cfg.seed, f), table.names, timings)
        t0 = time.perf_counter()
        pred = pipe.predict(X[test], clamp)
        timings["prediction"] = timings.get("prediction", 0.0) + time.perf_counter() - t0
        if not np.all(np.isfinite(pred)):
            raise DataError(f"non-finite predictions in fold {f}")
        pipelines.append((group_name, f, pipe))
        for i, p in zip(test, pred):
            out_pred[idx[i]] = p
            out_fold[idx[i]] = f
        fold_rows.append({
            "group": group_name,
            "fold": f,
            "n_train": int(len(train)),
            "n_test": int(len(test)),
            "rmse": rmse(pred, y[test]),
            "mae": mae(pred, y[test]),
            "best_params": pipe.search.best_params,
            "selected": list(pipe.selection.names),
        })


def evaluate_cv(table: FeatureTable, meta, family: str, cfg: CvConfig | None = None) -> CvResult:
    """Out-of-fold predictions for every sample in ``meta``.

    With ``gender_mode="separate"`` each gender group gets its own folds and
    models; with ``"sliced"`` one model set covers all samples.
    """
    cfg = cfg or CvConfig()
    n = len(meta)
    pred = np.full(n, np.nan)
    fold = np.full(n, -1)
    timings: dict = {}
    fold_rows: list[dict] = []
    pipelines: list = []
    if cfg.gender_mode == "separate":
        groups = sorted({m.gender_group for m in meta})
        for g in groups:
            idx = [i for i, m in enumerate(meta) if m.gender_group == g]
            _run_group(family, table, meta, idx, cfg, g, timings, fold_rows, pred, fold, pipelines)
    else:
        _run_group(family, table, meta, list(range(n)), cfg, "all", timings, fold_rows, pred, fold,
                   pipelines)
    if np.any(fold < 0):
        raise DataError("some samples were never predicted")
    return CvResult(
        family=family,
        sample_ids=[m.sample_id for m in meta],
        truth=np.array([m.phq8 for m in meta], dtype=float),
        prediction=pred,
        fold=fold,
        group=[m.gender_group for m in meta],
        fold_rows=fold_rows,
        timings=timings,
        pipelines=pipelines,
    )


def summarize(result: CvResult, meta) -> dict:
    """Overall, per-gender and per-task errors plus the error-correlation analysis."""
    truth, pred = result.truth, result.prediction
    out = {"family": result.family, "overall": _summary(pred, truth)}
    genders = np.array([m.gender_group for m in meta])
    tasks = np.array([m.task for m in meta])
    out["gender"] = {g: _summary(pred[genders == g], truth[genders == g])
                     for g in sorted(set(genders.tolist()))}
    out["task"] = {t: _summary(pred[tasks == t], truth[tasks == t])
                   for t in sorted(set(tasks.tolist()))}
    err = result.abs_error
    duration = np.array([m.duration_s for m in meta], dtype=float)
    out["ccc"] = {
        "abs_error_vs_duration": ccc(err, duration),
        "abs_error_vs_phq8": ccc(err, truth),
    }
    out["folds"] = result.fold_rows
    return out
