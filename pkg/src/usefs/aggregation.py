"""Ensemble feature-selection aggregators and their weighting terms.

Rank-list methods (lower score wins):
    cla  sum of ranks
    wma  ranks weighted by (1 - AUC) of the way that produced them

Occurrence methods (higher score wins), over each way's positive-importance set:
    ofa  occurrence count
    caa  occurrences weighted by way accuracy
    maa  caa with each contribution divided by (missing_rate + alpha) ** beta
    eaa  caa with each contribution divided by (entropy_delta + alpha) ** beta

Scores are accumulated way by way in way order, so two features with the
same contributions get bit-identical scores and ties fall to the lower index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data_model import ColumnKind, Dataset

RANK_METHODS = ("cla", "wma")
OCCURRENCE_METHODS = ("ofa", "caa", "maa", "eaa")
METHODS = RANK_METHODS + OCCURRENCE_METHODS


@dataclass(frozen=True)
class VarianceWeightParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")


MAA_DEFAULT = VarianceWeightParams(alpha=1.0, beta=2.0)
EAA_DEFAULT = VarianceWeightParams(alpha=0.5, beta=2.0)


@dataclass(frozen=True)
class AggregateScores:
    method: str
    per_feature_score: np.ndarray
    higher_is_better: bool
    selected: list[int]

    def to_dict(self, names: Sequence[str] | None = None) -> dict:
        out = {
            "method": self.method,
            "direction": "higher-is-better" if self.higher_is_better else "lower-is-better",
            "selected": [int(j) for j in self.selected],
            "scores": [float(self.per_feature_score[j]) for j in self.selected],
        }
        if names is not None:
            out["selected_names"] = [names[j] for j in self.selected]
        return out


def top_k(scores: np.ndarray, k: int, higher_is_better: bool) -> list[int]:
    """Indices of the best ``min(k, F)`` scores; ties go to the lower index."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    idx = np.arange(scores.size)
    key = -scores if higher_is_better else scores
    return [int(j) for j in np.lexsort((idx, key))[:k]]


def _rank_matrix(ranks) -> np.ndarray:
    ranks = np.asarray(ranks, dtype=np.int64)
    if ranks.ndim != 2 or ranks.shape[0] < 1:
        raise ValueError("need at least one rank list")
    return ranks


def _set_matrix(positive_sets, n_features: int | None) -> np.ndarray:
    sets = [sorted(int(f) for f in s) for s in positive_sets]
    if not sets:
        raise ValueError("need at least one feature set")
    if n_features is None:
        n_features = 1 + max((s[-1] for s in sets if s), default=-1)
    member = np.zeros((len(sets), n_features), dtype=bool)
    for w, s in enumerate(sets):
        member[w, s] = True
    return member


def _check_fractions(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if ((v < 0) | (v > 1)).any():
        raise ValueError(f"{name} must lie in [0, 1]")
    return v


def cla(ranks, k: int) -> AggregateScores:
    r = _rank_matrix(ranks)
    score = np.zeros(r.shape[1])
    for row in r:
        score += row
    return AggregateScores("cla", score, False, top_k(score, k, False))


def wma(ranks, cv_aucs, k: int) -> AggregateScores:
    r = _rank_matrix(ranks)
    aucs = _check_fractions(cv_aucs, "cv_aucs")
    if aucs.shape != (r.shape[0],):
        raise ValueError("one AUC per rank list required")
    score = np.zeros(r.shape[1])
    for row, a in zip(r, aucs):
        score += (1.0 - a) * row
    return AggregateScores("wma", score, False, top_k(score, k, False))


def _weighted_occurrence(member: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Sum of per-way, per-feature weights over the ways containing each feature."""
    score = np.zeros(member.shape[1])
    for w in range(member.shape[0]):
        score += np.where(member[w], weights[w], 0.0)
    return score


def ofa(positive_sets, k: int, n_features: int | None = None) -> AggregateScores:
    member = _set_matrix(positive_sets, n_features)
    score = member.sum(axis=0).astype(float)
    return AggregateScores("ofa", score, True, top_k(score, k, True))


def caa(positive_sets, cv_accuracies, k: int, n_features: int | None = None) -> AggregateScores:
    member = _set_matrix(positive_sets, n_features)
    acc = _check_fractions(cv_accuracies, "cv_accuracies")
    if acc.shape != (member.shape[0],):
        raise ValueError("one accuracy per feature set required")
    weights = np.broadcast_to(acc[:, None], member.shape)
    score = _weighted_occurrence(member, weights)
    return AggregateScores("caa", score, True, top_k(score, k, True))


def maa_weight(accuracy, missing_rate, p: VarianceWeightParams = MAA_DEFAULT):
    return accuracy / (missing_rate + p.alpha) ** p.beta


def eaa_weight(accuracy, delta_entropy, p: VarianceWeightParams = EAA_DEFAULT):
    return accuracy / (delta_entropy + p.alpha) ** p.beta


def _penalized(method, positive_sets, cv_accuracies, penalty, p, k, weight_fn):
    penalty = np.asarray(penalty, dtype=float)
    member = _set_matrix(positive_sets, penalty.size)
    acc = _check_fractions(cv_accuracies, "cv_accuracies")
    if acc.shape != (member.shape[0],):
        raise ValueError("one accuracy per feature set required")
    if (penalty < 0).any():
        raise ValueError("per-feature penalty terms must be >= 0")
    weights = weight_fn(acc[:, None], penalty[None, :], p)
    score = _weighted_occurrence(member, weights)
    return AggregateScores(method, score, True, top_k(score, k, True))


def maa(positive_sets, cv_accuracies, missing_rates, p: VarianceWeightParams = MAA_DEFAULT, k: int = 20):
    rates = _check_fractions(missing_rates, "missing_rates")
    return _penalized("maa", positive_sets, cv_accuracies, rates, p, k, maa_weight)


def eaa(positive_sets, cv_accuracies, deltas, p: VarianceWeightParams = EAA_DEFAULT, k: int = 20):
    return _penalized("eaa", positive_sets, cv_accuracies, deltas, p, k, eaa_weight)


def shannon_entropy(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def entropy_delta(before: Dataset, after: Dataset, bins: int = 10) -> np.ndarray:
    """Absolute Shannon-entropy change (bits) per feature caused by imputation.

    ``before`` counts present cells only, ``after`` counts every cell.
    Numerical features are histogrammed into ``bins`` equal-width bins over
    the range spanned by both versions; a constant range has entropy 0.
    """
    if before.values.shape != after.values.shape:
        raise ValueError(f"shape mismatch: {before.values.shape} vs {after.values.shape}")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    out = np.zeros(before.n_features)
    for j, col in enumerate(before.columns):
        b = before.values[:, j]
        b = b[~np.isnan(b)]
        a = after.values[:, j]
        a = a[~np.isnan(a)]
        if col.kind is ColumnKind.CATEGORICAL:
            c = before.n_categories(j)
            h_b = shannon_entropy(np.bincount(b.astype(np.int64), minlength=c))
            h_a = shannon_entropy(np.bincount(a.astype(np.int64), minlength=c))
        else:
            both = np.concatenate([a, b])
            if both.size == 0:
                continue
            lo, hi = both.min(), both.max()
            if hi == lo:
                continue
            edges = np.linspace(lo, hi, bins + 1)
            h_b = shannon_entropy(np.histogram(b, edges)[0])
            h_a = shannon_entropy(np.histogram(a, edges)[0])
        out[j] = abs(h_a - h_b)
    return out


def aggregate(
    method: str,
    k: int,
    *,
    ranks=None,
    cv_aucs=None,
    positive_sets=None,
    cv_accuracies=None,
    missing_rates=None,
    deltas=None,
    n_features: int | None = None,
    maa_params: VarianceWeightParams = MAA_DEFAULT,
    eaa_params: VarianceWeightParams = EAA_DEFAULT,
) -> AggregateScores:
    """Dispatch on ``method`` (one of METHODS)."""
    if method == "cla":
        return cla(ranks, k)
    if method == "wma":
        return wma(ranks, cv_aucs, k)
    if method == "ofa":
        return ofa(positive_sets, k, n_features)
    if method == "caa":
        return caa(positive_sets, cv_accuracies, k, n_features)
    if method == "maa":
        return maa(positive_sets, cv_accuracies, missing_rates, maa_params, k)
    if method == "eaa":
        return eaa(positive_sets, cv_accuracies, deltas, eaa_params, k)
    raise ValueError(f"unknown aggregation method {method!r}; expected one of {METHODS}")
