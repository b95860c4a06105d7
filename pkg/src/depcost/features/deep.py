"""Ingestion and aggregation of externally computed windowed deep-feature matrices."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, FeatureFormatError

DEEP_DIM = 4096
WINDOW_S = 1.0
HOP_MS = 300.0


@dataclass(frozen=True)
class DeepFeatureMatrix:
    rows: np.ndarray
    sample_id: str
    window_s: float = WINDOW_S
    hop_ms: float = HOP_MS

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def window_count(duration_s: float, window_s: float = WINDOW_S, hop_ms: float = HOP_MS) -> int:
    """Number of analysis windows for a clip (at least one)."""
    hop = hop_ms / 1000.0
    if duration_s <= window_s:
        return 1
    return int(np.floor((duration_s - window_s) / hop + 1e-9)) + 1


def ingest_deep_features(path, expected_dim: int | None = DEEP_DIM) -> DeepFeatureMatrix:
    """Read one per-sample matrix file (comma or whitespace delimited).

    The sample id is the file name without extension.
    """
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise EmptyInputError(f"{path}: empty deep-feature file")
    delimiter = "," if "," in lines[0] else None
    try:
        rows = np.loadtxt(lines, delimiter=delimiter, ndmin=2, dtype=float)
    except ValueError as exc:
        raise FeatureFormatError(f"{path}: {exc}") from exc
    if expected_dim is not None and rows.shape[1] != expected_dim:
        raise FeatureFormatError(f"{path}: rows have {rows.shape[1]} columns, expected {expected_dim}")
    sample_id = os.path.splitext(os.path.basename(str(path)))[0]
    return DeepFeatureMatrix(rows, sample_id)


def aggregate_deep(matrix: DeepFeatureMatrix):
    """Per-dimension mean followed by per-dimension population std over windows."""
    from .conventional import FeatureVector

    rows = matrix.rows
    values = np.concatenate([rows.mean(axis=0), rows.std(axis=0)])
    return FeatureVector(values, f"deep{matrix.dim}-meanstd", matrix.sample_id)


def deep_feature_names(dim: int = DEEP_DIM) -> list[str]:
    return [f"deep{i}_mean" for i in range(dim)] + [f"deep{i}_std" for i in range(dim)]


def write_deep_matrix(path, rows: np.ndarray) -> None:
    tmp = f"{path}.tmp"
    np.savetxt(tmp, rows, fmt="%.6g", delimiter=",")
    os.replace(tmp, path)
