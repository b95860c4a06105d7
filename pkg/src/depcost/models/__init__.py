"""Regressors: RBF support-vector regression, random forest, feedforward network."""

from .fnn import FnnConfig, FnnModel, fnn_fit, param_count
from .forest import ForestModel, forest_fit
from .search import DEFAULT_GRIDS, FAMILIES, GridSearchPlan, fit_family, grid_search, predict
from .serialize import load_model, save_model
from .svr import SvrModel, svr_fit

__all__ = [
    "DEFAULT_GRIDS", "FAMILIES", "FnnConfig", "FnnModel", "ForestModel", "GridSearchPlan",
    "SvrModel", "fit_family", "fnn_fit", "forest_fit", "grid_search", "load_model",
    "param_count", "predict", "save_model", "svr_fit",
]
