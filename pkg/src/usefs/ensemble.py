"""Undersampling ensemble: balanced ways, per-way trees, CV metrics, voting.

Each way trains on every positive row plus an equal-sized sample of negative
rows drawn without replacement. In the selection phase every way reports CV
accuracy/AUC, the positive-importance feature set of its final tree, and
(optionally) an RFE ranking; the aggregators turn those into one feature set.
In the evaluation phase the same construction runs inside an outer
stratified CV, and the ways' trees vote on held-out rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from . import aggregation, cart, metrics, seeding
from .data_model import Dataset
from .ranking import rfe_rank

MAX_FOLD_ATTEMPTS = 10


class FoldDegeneracyError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnsembleConfig:
    n_ways: int = 91
    n_features: int = 20
    cv_folds: int = 10
    seed: int = 0
    aggregation: str = "caa"
    max_depth: int | None = None
    min_samples_split: int = 2
    rfe_step: int = 1
    # None: compute RFE ranks only when the aggregation method consumes them
    compute_ranks: bool | None = None
    # weight for CAA/MAA/EAA contributions: "accuracy" or "auc"
    occurrence_weight: str = "accuracy"
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_ways < 1 or self.n_ways % 2 == 0:
            raise ValueError(f"n_ways must be a positive odd integer, got {self.n_ways}")
        if self.n_features < 1:
            raise ValueError(f"n_features must be >= 1, got {self.n_features}")
        if self.cv_folds < 2:
            raise ValueError(f"cv_folds must be >= 2, got {self.cv_folds}")
        if self.aggregation not in aggregation.METHODS:
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if self.occurrence_weight not in ("accuracy", "auc"):
            raise ValueError("occurrence_weight must be 'accuracy' or 'auc'")

    @property
    def tree_params(self) -> dict:
        return {"max_depth": self.max_depth, "min_samples_split": self.min_samples_split}

    @property
    def needs_ranks(self) -> bool:
        if self.compute_ranks is not None:
            return self.compute_ranks
        return self.aggregation in aggregation.RANK_METHODS


@dataclass
class WayModel:
    way_index: int
    row_ids: np.ndarray
    tree: cart.Tree
    cv_accuracy: float
    cv_auc: float
    positive_set: frozenset[int]
    rank_list: np.ndarray | None = None
    importances: np.ndarray = field(default=None, repr=False)


def _labels(d) -> np.ndarray:
    return np.asarray(d.outcome if isinstance(d, Dataset) else d).astype(np.int64)


def make_ways(d: Dataset | Sequence[int], n_ways: int, seed: int) -> list[np.ndarray]:
    """Row ids of each balanced way: all positives plus |P| sampled negatives.

    ``d`` may be a Dataset or a plain label vector. Way ``i`` samples with
    its own sub-seed, so the sets are reproducible individually.
    """
    y = _labels(d)
    if n_ways < 1:
        raise ValueError("n_ways must be >= 1")
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if pos.size == 0:
        raise ValueError("no positive rows to undersample against")
    if neg.size < pos.size:
        raise ValueError(f"{neg.size} negative rows is fewer than {pos.size} positive rows")
    ways = []
    for i in range(n_ways):
        picked = seeding.sub_rng(seed, seeding.WAYS, i).choice(neg, size=pos.size, replace=False)
        ways.append(np.sort(np.concatenate([pos, picked])))
    return ways


def _deal_folds(y: np.ndarray, folds: int, seed: int, *keys: int) -> np.ndarray:
    for attempt in range(MAX_FOLD_ATTEMPTS):
        assign = metrics.stratified_folds(y, folds, seed, *keys, attempt)
        ok = True
        for f in range(folds):
            test = assign == f
            if np.unique(y[test]).size < 2 or np.unique(y[~test]).size < 2:
                ok = False
                break
        if ok:
            return assign
    raise FoldDegeneracyError(
        f"could not deal {folds} folds with both classes in every split after "
        f"{MAX_FOLD_ATTEMPTS} attempts (class counts {np.bincount(y, minlength=2).tolist()})"
    )


def cross_validate(x: np.ndarray, y: np.ndarray, folds: int, seed: int, *keys: int, **tree_params):
    """Pooled held-out (accuracy, auc) of a single tree under stratified CV.

    The AUC score of a row is the positive fraction of the leaf it lands in.
    """
    assign = _deal_folds(y, folds, seed, *keys)
    preds = np.zeros(y.size, dtype=np.int64)
    scores = np.zeros(y.size)
    for f in range(folds):
        test = assign == f
        t = cart.fit(x[~test], y[~test], **tree_params)
        preds[test] = cart.predict(t, x[test])
        scores[test] = cart.predict_score(t, x[test])
    return metrics.accuracy(preds, y), metrics.auc(scores, y)


def fit_way(x: np.ndarray, y: np.ndarray, rows: np.ndarray, way_index: int, cfg: EnsembleConfig) -> WayModel:
    xw, yw = x[rows], y[rows]
    acc, auc = cross_validate(
        xw, yw, cfg.cv_folds, cfg.seed, seeding.WAY_FOLDS, way_index, **cfg.tree_params
    )
    tree = cart.fit(xw, yw, **cfg.tree_params)
    imp = cart.importances(tree)
    ranks = rfe_rank(xw, yw, step=cfg.rfe_step, **cfg.tree_params) if cfg.needs_ranks else None
    return WayModel(
        way_index=way_index,
        row_ids=rows,
        tree=tree,
        cv_accuracy=acc,
        cv_auc=auc,
        positive_set=frozenset(int(f) for f in np.flatnonzero(imp > 0)),
        rank_list=ranks,
        importances=imp,
    )


def fit_ways(d: Dataset | np.ndarray, ways: list[np.ndarray], cfg: EnsembleConfig, y=None) -> list[WayModel]:
    """Fit every way; results come back ordered by way index.

    ``d`` is a complete Dataset, or a feature matrix together with ``y``.
    """
    if isinstance(d, Dataset):
        if d.missing.any():
            raise ValueError("fit_ways needs a complete dataset; impute first")
        x, y = d.values, d.outcome
    else:
        x, y = np.asarray(d, dtype=float), np.asarray(y)
    y = y.astype(np.int64)
    if cfg.n_jobs == 1:
        return [fit_way(x, y, rows, i, cfg) for i, rows in enumerate(ways)]
    return Parallel(n_jobs=cfg.n_jobs)(
        delayed(fit_way)(x, y, rows, i, cfg) for i, rows in enumerate(ways)
    )


def _trees(models) -> list[cart.Tree]:
    return [m.tree if isinstance(m, WayModel) else m for m in models]


def vote_counts(models, x) -> np.ndarray:
    trees = _trees(models)
    votes = np.zeros(np.shape(x)[0], dtype=np.int64)
    for t in trees:
        votes += cart.predict(t, x)
    return votes


def majority_vote(models, x) -> np.ndarray:
    """1 where strictly more than half of the models predict 1."""
    n = len(models)
    if n == 0 or n % 2 == 0:
        raise ValueError(f"majority vote needs an odd number of models, got {n}")
    return (2 * vote_counts(models, x) > n).astype(np.int64)


def aggregate_ways(
    models: list[WayModel],
    method: str,
    k: int,
    missing_rates=None,
    deltas=None,
    occurrence_weight: str = "accuracy",
    maa_params: aggregation.VarianceWeightParams = aggregation.MAA_DEFAULT,
    eaa_params: aggregation.VarianceWeightParams = aggregation.EAA_DEFAULT,
) -> aggregation.AggregateScores:
    """Run one aggregator over fitted ways."""
    models = sorted(models, key=lambda m: m.way_index)
    n_features = models[0].tree.n_features
    ranks = None
    if method in aggregation.RANK_METHODS:
        if any(m.rank_list is None for m in models):
            raise ValueError(f"{method} needs rank lists; fit ways with compute_ranks=True")
        ranks = np.stack([m.rank_list for m in models])
    weights = [m.cv_accuracy if occurrence_weight == "accuracy" else m.cv_auc for m in models]
    return aggregation.aggregate(
        method,
        k,
        ranks=ranks,
        cv_aucs=[m.cv_auc for m in models],
        positive_sets=[m.positive_set for m in models],
        cv_accuracies=weights,
        missing_rates=missing_rates,
        deltas=deltas,
        n_features=n_features,
        maa_params=maa_params,
        eaa_params=eaa_params,
    )


def evaluate(
    d: Dataset,
    selected: Sequence[int],
    cfg: EnsembleConfig,
    missing_rates=None,
    deltas=None,
) -> metrics.EvalReport:
    """Outer stratified CV of the voting ensemble restricted to ``selected``.

    Per outer fold, ways are built from the training rows only and vote on
    the held-out rows. Accuracy uses the majority vote; the score-based AUC
    uses each row's positive-vote fraction and the vote-based AUC the 0/1 vote.
    """
    if d.missing.any():
        raise ValueError("evaluate needs a complete dataset; impute first")
    selected = [int(j) for j in selected]
    if not selected:
        raise ValueError("selected feature set is empty")
    if min(selected) < 0 or max(selected) >= d.n_features:
        raise ValueError("selected features out of range")
    y = d.outcome
    if y.min() == y.max():
        raise ValueError("evaluation needs both classes present")
    x = d.values[:, selected]

    assign = _deal_folds(y, cfg.cv_folds, cfg.seed, seeding.OUTER_FOLDS)
    votes = np.zeros(y.size, dtype=np.int64)
    per_fold = []
    for f in range(cfg.cv_folds):
        test = assign == f
        train = np.flatnonzero(~test)
        ways = make_ways(y[train], cfg.n_ways, seeding.sub_seed(cfg.seed, seeding.OUTER_WAYS, f))
        trees = [cart.fit(x[train[w]], y[train[w]], **cfg.tree_params) for w in ways]
        votes[test] = vote_counts(trees, x[test])
        fold_pred = (2 * votes[test] > cfg.n_ways).astype(np.int64)
        per_fold.append(
            metrics.FoldReport(
                fold=f,
                n_test=int(test.sum()),
                accuracy=metrics.accuracy(fold_pred, y[test]),
                auc_score_based=metrics.safe_auc(votes[test] / cfg.n_ways, y[test]),
                auc_vote_based=metrics.safe_auc(fold_pred, y[test]),
                confusion=vars(metrics.confusion(fold_pred, y[test])),
            )
        )
    preds = (2 * votes > cfg.n_ways).astype(np.int64)
    diagnostics = {}
    if missing_rates is not None:
        diagnostics["mean_missing_rate_selected"] = float(np.mean(np.asarray(missing_rates)[selected]))
    if deltas is not None:
        diagnostics["mean_entropy_delta_selected"] = float(np.mean(np.asarray(deltas)[selected]))
    return metrics.EvalReport(
        accuracy=metrics.accuracy(preds, y),
        auc_score_based=metrics.auc(votes / cfg.n_ways, y),
        auc_vote_based=metrics.auc(preds, y),
        confusion=vars(metrics.confusion(preds, y)),
        per_fold=per_fold,
        diagnostics=diagnostics,
        selected=selected,
        selected_names=[d.columns[j].name for j in selected],
        n_ways=cfg.n_ways,
    )


def with_ways(cfg: EnsembleConfig, n_ways: int) -> EnsembleConfig:
    return replace(cfg, n_ways=n_ways)
