"""Per-recording metadata and its CSV form."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

from ..errors import DataError

TASKS = ("phoneme", "phonemic_fluency", "picture_description", "semantic_fluency",
         "prompted_narrative")
GENDERS = ("male", "female")
META_COLUMNS = ("sample_id", "subject_id", "gender", "task", "phq8", "duration_s")


@dataclass(frozen=True)
class SampleMeta:
    sample_id: str
    subject_id: str
    gender: str
    task: str
    phq8: int
    duration_s: float

    def __post_init__(self):
        if not self.sample_id or not self.subject_id:
            raise DataError("sample_id and subject_id must be nonempty")
        if not 0 <= self.phq8 <= 24:
            raise DataError(f"{self.sample_id}: phq8 {self.phq8} outside 0..24")
        if self.task not in TASKS:
            raise DataError(f"{self.sample_id}: unknown task {self.task!r}")
        if not self.duration_s >= 0:
            raise DataError(f"{self.sample_id}: invalid duration")

    @property
    def gender_group(self) -> str:
        return self.gender if self.gender in GENDERS else "other"


def load_meta(path) -> list[SampleMeta]:
    """Read the metadata CSV (header required). Any malformed row aborts the load."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames[:6]) != list(META_COLUMNS):
            raise DataError(f"{path}: header must start with {','.join(META_COLUMNS)}")
        for line, rec in enumerate(reader, start=2):
            try:
                phq = float(rec["phq8"])
                if phq != int(phq):
                    raise ValueError("phq8 must be an integer")
                rows.append(SampleMeta(
                    sample_id=rec["sample_id"].strip(),
                    subject_id=rec["subject_id"].strip(),
                    gender=rec["gender"].strip().lower(),
                    task=rec["task"].strip(),
                    phq8=int(phq),
                    duration_s=float(rec["duration_s"]),
                ))
            except (TypeError, ValueError, AttributeError) as exc:
                raise DataError(f"{path}:{line}: {exc}") from exc
    ids = [m.sample_id for m in rows]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate sample_id")
    if not rows:
        raise DataError(f"{path}: no rows")
    return rows


def write_meta(path, rows) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(META_COLUMNS)
        for m in rows:
            w.writerow([m.sample_id, m.subject_id, m.gender, m.task, m.phq8, repr(float(m.duration_s))])
    os.replace(tmp, path)
