"""Subject-independent folds stratified by depression severity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FoldError

# upper edges of the minimal / mild / moderate / severe PHQ-8 bands
SEVERITY_EDGES = (5, 9, 14)
N_BINS = len(SEVERITY_EDGES) + 1


def severity_bin(phq8) -> np.ndarray:
    """0 for scores <= 5, 1 for 6..9, 2 for 10..14, 3 for >= 15."""
    return np.searchsorted(np.asarray(SEVERITY_EDGES), np.asarray(phq8), side="left")


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[str, ...], ...]
    # bin_counts[f, b] = subjects of severity bin b in fold f
    bin_counts: np.ndarray
    seed: int

    @property
    def k(self) -> int:
        return len(self.folds)

    def fold_of_subject(self) -> dict:
        return {s: f for f, members in enumerate(self.folds) for s in members}

    def sample_folds(self, subject_ids) -> np.ndarray:
        lookup = self.fold_of_subject()
        return np.array([lookup[s] for s in subject_ids], dtype=int)


def plan_subject_folds(subjects, severity, k: int = 5, seed: int = 0) -> FoldPlan:
    """Deal subjects into ``k`` folds.

    Subjects are grouped by severity bin, shuffled within each bin with a
    seeded generator, then dealt round-robin. The dealing position carries
    over from one bin to the next so fold sizes stay within one subject.
    """
    subjects = [str(s) for s in subjects]
    severity = np.asarray(severity)
    if len(set(subjects)) != len(subjects):
        raise ValueError("subject ids must be unique")
    if len(subjects) < k:
        raise FoldError(f"need at least {k} subjects, got {len(subjects)}")
    if k < 2:
        raise FoldError("k must be >= 2")
    bins = severity_bin(severity)
    rng = np.random.default_rng(seed)
    members = [[] for _ in range(k)]
    counts = np.zeros((k, N_BINS), dtype=int)
    pos = 0
    order = np.argsort(np.array(subjects), kind="stable")
    for b in range(N_BINS):
        in_bin = [i for i in order if bins[i] == b]
        for i in rng.permutation(len(in_bin)):
            members[pos % k].append(subjects[in_bin[i]])
            counts[pos % k, b] += 1
            pos += 1
    return FoldPlan(tuple(tuple(sorted(m)) for m in members), counts, seed)


def subject_severity(subject_ids, phq8) -> tuple[list[str], np.ndarray]:
    """Unique subjects (sorted) and the maximum score among each subject's samples."""
    subject_ids = np.asarray([str(s) for s in subject_ids])
    phq8 = np.asarray(phq8, dtype=float)
    uniq = sorted(set(subject_ids.tolist()))
    sev = np.array([phq8[subject_ids == s].max() for s in uniq])
    return uniq, sev


def subject_folds(subject_ids, phq8, k: int = 5, seed: int = 0) -> np.ndarray:
    """Per-sample fold index for a stratified subject-independent split."""
    uniq, sev = subject_severity(subject_ids, phq8)
    plan = plan_subject_folds(uniq, sev, k, seed)
    return plan.sample_folds([str(s) for s in subject_ids])


def make_folds(meta, k: int = 5, seed: int = 0) -> FoldPlan:
    """FoldPlan over the subjects in a list of SampleMeta rows."""
    uniq, sev = subject_severity([m.subject_id for m in meta], [m.phq8 for m in meta])
    return plan_subject_folds(uniq, sev, k, seed)
