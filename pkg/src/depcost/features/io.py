"""Feature CSV and flags sidecar files."""

from __future__ import annotations

import csv
import os

import numpy as np

from ..errors import FeatureFormatError


def _atomic_write_rows(path, header, rows):
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


def write_feature_csv(path, names, ids, matrix) -> None:
    """Header = ``sample_id`` + feature names; floats written with full precision."""
    matrix = np.asarray(matrix, dtype=float)
    rows = ([sid] + [repr(float(v)) for v in row] for sid, row in zip(ids, matrix))
    _atomic_write_rows(path, ["sample_id", *names], rows)


def read_feature_csv(path) -> tuple[list[str], list[str], np.ndarray]:
    """Return ``(ids, names, matrix)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FeatureFormatError(f"{path}: empty feature file") from None
        if not header or header[0] != "sample_id":
            raise FeatureFormatError(f"{path}: first column must be sample_id")
        names = header[1:]
        ids, rows = [], []
        for line_no, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise FeatureFormatError(f"{path}:{line_no}: expected {len(header)} fields, got {len(rec)}")
            ids.append(rec[0])
            rows.append([float(v) for v in rec[1:]])
    matrix = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return ids, names, matrix


def write_flags(path, flags_by_id: dict[str, tuple[str, ...]], ids) -> None:
    _atomic_write_rows(path, ["sample_id", "imputed"],
                       ([sid, ";".join(flags_by_id.get(sid, ()))] for sid in ids))


def read_flags(path) -> dict[str, tuple[str, ...]]:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for sid, imputed in reader:
            out[sid] = tuple(x for x in imputed.split(";") if x)
    return out
