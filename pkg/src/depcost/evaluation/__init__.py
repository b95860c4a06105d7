"""Cross-validation protocol, metrics, statistical tests and cost accounting."""

from .cv import CvConfig, CvResult, FeatureTable, evaluate_cv, summarize
from .folds import FoldPlan, make_folds, severity_bin
from .meta import SampleMeta, load_meta, write_meta
from .metrics import ccc, mae, pearson, rmse
from .stats import ttest_two_sample, wilcoxon_signed_rank
from .timing import StageTimings

__all__ = [
    "CvConfig", "CvResult", "FeatureTable", "FoldPlan", "SampleMeta", "StageTimings",
    "ccc", "evaluate_cv", "load_meta", "mae", "make_folds", "pearson", "rmse",
    "severity_bin", "summarize", "ttest_two_sample", "wilcoxon_signed_rank", "write_meta",
]
