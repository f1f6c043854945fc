"""Accuracy, ROC-AUC, confusion counts and stratified fold assignment."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata

from .seeding import sub_rng


def _binary(a, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 1:
        raise ValueError(f"{name} must be 1-D")
    if not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must be binary 0/1")
    return a.astype(np.int64)


def auc(scores, labels) -> float:
    """Probability that a random positive outscores a random negative.

    Ties count one half. Computed from the rank sum (Mann-Whitney U).
    """
    scores = np.asarray(scores, dtype=float)
    labels = _binary(labels, "labels")
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores)  # average ranks for ties
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def accuracy(preds, labels) -> float:
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {labels.shape}")
    if preds.size == 0:
        raise ValueError("accuracy of an empty vector is undefined")
    return float(np.mean(preds == labels))


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(preds, labels) -> Confusion:
    preds = _binary(preds, "preds")
    labels = _binary(labels, "labels")
    if preds.shape != labels.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {labels.shape}")
    return Confusion(
        tp=int(np.sum((preds == 1) & (labels == 1))),
        fp=int(np.sum((preds == 1) & (labels == 0))),
        tn=int(np.sum((preds == 0) & (labels == 0))),
        fn=int(np.sum((preds == 0) & (labels == 1))),
    )


def stratified_folds(labels, folds: int, seed: int, *keys: int) -> np.ndarray:
    """Fold id per row.

    Each class is shuffled with its own sub-seed and then dealt round-robin,
    so per-class fold sizes differ by at most one. Extra ``keys`` are folded
    into the sub-seed (way index, attempt, ...).
    """
    labels = _binary(labels, "labels")
    if folds < 2:
        raise ValueError(f"need at least 2 folds, got {folds}")
    if folds > labels.size:
        raise ValueError(f"{folds} folds but only {labels.size} rows")
    out = np.empty(labels.size, dtype=np.int64)
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        idx = sub_rng(seed, *keys, cls).permutation(idx)
        out[idx] = np.arange(idx.size) % folds
    return out


@dataclass
class FoldReport:
    fold: int
    n_test: int
    accuracy: float
    auc_score_based: float | None
    auc_vote_based: float | None
    confusion: dict


@dataclass
class EvalReport:
    """Held-out performance of an ensemble on a selected feature set.

    Field names are the JSON contract consumed by the CLI.
    """

    accuracy: float
    auc_score_based: float
    auc_vote_based: float
    confusion: dict
    per_fold: list[FoldReport] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    selected: list[int] = field(default_factory=list)
    selected_names: list[str] = field(default_factory=list)
    n_ways: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def safe_auc(scores, labels) -> float | None:
    """AUC, or None when only one class is present."""
    labels = np.asarray(labels)
    if labels.size == 0 or labels.min() == labels.max():
        return None
    return auc(scores, labels)
