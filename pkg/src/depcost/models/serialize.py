"""Versioned JSON serialization of fitted models (lossless for float64)."""

from __future__ import annotations

import json
import os

import numpy as np

from .fnn import FnnConfig, FnnModel
from .forest import ForestModel, Tree
from .svr import SvrModel

FORMAT = "depcost-model"
VERSION = 1


def _arr(a) -> dict:
    a = np.asarray(a)
    return {"dtype": str(a.dtype), "shape": list(a.shape), "data": a.ravel().tolist()}


def _unarr(d) -> np.ndarray:
    return np.array(d["data"], dtype=d["dtype"]).reshape(d["shape"])


def model_to_dict(model) -> dict:
    head = {"format": FORMAT, "version": VERSION}
    if isinstance(model, SvrModel):
        return {**head, "family": "svr",
                "support_vectors": _arr(model.support_vectors),
                "dual_coef": _arr(model.dual_coef),
                "bias": model.bias, "C": model.C, "gamma": model.gamma,
                "epsilon": model.epsilon, "converged": model.converged, "n_iter": model.n_iter}
    if isinstance(model, ForestModel):
        return {**head, "family": "forest", "n_features": model.n_features,
                "n_trees": model.n_trees, "max_depth": model.max_depth, "seed": model.seed,
                "bootstrap": model.bootstrap, "min_leaf": model.min_leaf,
                "trees": [{k: _arr(getattr(t, k)) for k in ("feature", "threshold", "left", "right", "value")}
                          for t in model.trees]}
    if isinstance(model, FnnModel):
        cfg = dict(model.config.__dict__)
        cfg["hidden"] = list(cfg["hidden"])
        return {**head, "family": "fnn", "config": cfg,
                "layer_sizes": list(model.layer_sizes),
                "weights": [_arr(w) for w in model.weights],
                "biases": [_arr(b) for b in model.biases],
                "y_mean": model.y_mean, "y_scale": model.y_scale}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d: dict):
    if d.get("format") != FORMAT:
        raise ValueError("not a serialized model")
    if d.get("version") != VERSION:
        raise ValueError(f"unsupported model format version {d.get('version')}")
    fam = d["family"]
    if fam == "svr":
        return SvrModel(_unarr(d["support_vectors"]), _unarr(d["dual_coef"]), d["bias"], d["C"],
                        d["gamma"], d["epsilon"], d["converged"], d["n_iter"])
    if fam == "forest":
        trees = tuple(Tree(**{k: _unarr(v) for k, v in t.items()}) for t in d["trees"])
        return ForestModel(trees, d["n_features"], d["n_trees"], d["max_depth"], d["seed"],
                           d["bootstrap"], d["min_leaf"])
    if fam == "fnn":
        cfg = FnnConfig(**d["config"])
        return FnnModel([_unarr(w) for w in d["weights"]], [_unarr(b) for b in d["biases"]],
                        cfg, d["y_mean"], d["y_scale"])
    raise ValueError(f"unknown family {fam!r}")


def save_model(path, model) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)
    os.replace(tmp, path)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
