"""Binary CART classifier with Gini impurity.

Split search runs over per-feature presorted row orders, so each node costs
O(n_features * n_node) with no re-sorting. Candidate thresholds are midpoints
between consecutive distinct values; a cell goes left when ``value <= threshold``.

Best-split ties are settled exactly: the near-maximal candidates are
re-scored with rational arithmetic, then the lowest feature index and lowest
threshold win. This keeps the fitted tree independent of row order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

_NEAR_TIE = 1e-9


@dataclass(frozen=True)
class Leaf:
    label: int
    class_counts: tuple[int, int]

    @property
    def n_samples(self) -> int:
        return self.class_counts[0] + self.class_counts[1]


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"
    impurity_decrease: float
    n_samples: int
    class_counts: tuple[int, int]


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class Tree:
    root: Node
    n_features: int

    def predict(self, x) -> np.ndarray:
        return predict(self, x)

    def predict_score(self, x) -> np.ndarray:
        return predict_score(self, x)


def gini(n_pos: int, n: int) -> float:
    if n == 0:
        return 0.0
    p1 = n_pos / n
    return 1.0 - p1 * p1 - (1.0 - p1) ** 2


def _leaf(n_pos: int, n: int) -> Leaf:
    n_neg = n - n_pos
    return Leaf(int(n_pos > n_neg), (n_neg, n_pos))


def _exact_score(lp: int, nl: int, rp: int, nr: int) -> Fraction:
    ln, rn = nl - lp, nr - rp
    return Fraction(lp * lp + ln * ln, nl) + Fraction(rp * rp + rn * rn, nr)


def _best_split(vals: np.ndarray, ys: np.ndarray, n_pos: int):
    """Best split for one node.

    ``vals`` and ``ys`` are (n_features, n) arrays with each row sorted by value.
    Minimizing the weighted child Gini is the same as maximizing
    ``(lp^2 + ln^2)/nl + (rp^2 + rn^2)/nr``, which is what gets scored here.
    Returns (feature, position, exact score) or None when no valid threshold exists.
    """
    n = ys.shape[1]
    left_pos = np.cumsum(ys, axis=1)[:, :-1]
    nl = np.arange(1, n, dtype=np.int64)
    nr = n - nl
    left_neg = nl - left_pos
    right_pos = n_pos - left_pos
    right_neg = nr - right_pos
    score = (left_pos * left_pos + left_neg * left_neg) / nl + (
        right_pos * right_pos + right_neg * right_neg
    ) / nr
    valid = vals[:, 1:] > vals[:, :-1]
    if not valid.any():
        return None
    score = np.where(valid, score, -np.inf)
    top = score.max()
    feats, pos = np.nonzero(score >= top - _NEAR_TIE * max(1.0, abs(top)))
    best = None
    for f, i in zip(feats.tolist(), pos.tolist()):
        lp = int(left_pos[f, i])
        exact = _exact_score(lp, i + 1, n_pos - lp, n - i - 1)
        # np.nonzero walks row-major, so the first exact maximum has the lowest
        # feature index and then the lowest threshold
        if best is None or exact > best[2]:
            best = (f, i, exact)
    return best


def fit(
    x,
    y,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    seed: int = 0,
) -> Tree:
    """Grow a Gini CART tree greedily.

    Parameters
    ----------
    x : array-like, shape (n, F)
        Complete feature matrix; categorical features enter as ordinal ids.
    y : array-like of {0, 1}
    max_depth : int, optional
        None grows until leaves are pure or unsplittable.
    min_samples_split : int
        Nodes with fewer samples become leaves.
    seed : int
        Accepted for interface symmetry; the search itself is deterministic.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise ValueError(f"need a non-empty 2-D feature matrix, got shape {x.shape}")
    if np.isnan(x).any():
        raise ValueError("feature matrix has missing cells; impute first")
    if y.shape != (x.shape[0],):
        raise ValueError("y must have one label per row")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    y = y.astype(np.int64)
    n_total, n_feat = x.shape
    feat_col = np.arange(n_feat)[:, None]

    def grow(order: np.ndarray, depth: int) -> Node:
        rows = order[0]
        n = rows.size
        n_pos = int(y[rows].sum())
        if (
            n_pos == 0
            or n_pos == n
            or n < min_samples_split
            or (max_depth is not None and depth >= max_depth)
        ):
            return _leaf(n_pos, n)
        vals = x[order, feat_col]
        found = _best_split(vals, y[order], n_pos)
        if found is None:
            return _leaf(n_pos, n)
        f, i, exact = found
        parent = Fraction(n_pos * n_pos + (n - n_pos) ** 2, n)
        if exact <= parent:
            return _leaf(n_pos, n)
        threshold = (vals[f, i] + vals[f, i + 1]) / 2.0
        go_left = np.zeros(n_total, dtype=bool)
        go_left[order[f, : i + 1]] = True
        keep = go_left[order]
        left_order = order[keep].reshape(n_feat, -1)
        right_order = order[~keep].reshape(n_feat, -1)
        return Split(
            feature=f,
            threshold=float(threshold),
            left=grow(left_order, depth + 1),
            right=grow(right_order, depth + 1),
            impurity_decrease=float((exact - parent) / n),
            n_samples=n,
            class_counts=(n - n_pos, n_pos),
        )

    order = np.argsort(x, axis=0, kind="stable").T.copy()
    return Tree(grow(order, 0), n_feat)


def _route(t: Tree, x) -> list[tuple[np.ndarray, Leaf]]:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != t.n_features:
        raise ValueError(f"expected {t.n_features} columns, got shape {x.shape}")
    out = []
    stack = [(t.root, np.arange(x.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out.append((idx, node))
            continue
        left = x[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[left]))
        stack.append((node.right, idx[~left]))
    return out


def predict(t: Tree, x) -> np.ndarray:
    """Leaf class for each row."""
    out = np.zeros(np.shape(x)[0], dtype=np.int64)
    for idx, leaf in _route(t, x):
        out[idx] = leaf.label
    return out


def predict_score(t: Tree, x) -> np.ndarray:
    """Positive-class fraction of each row's leaf."""
    out = np.zeros(np.shape(x)[0])
    for idx, leaf in _route(t, x):
        out[idx] = leaf.class_counts[1] / leaf.n_samples
    return out


def iter_splits(node: Node):
    stack = [node]
    while stack:
        node = stack.pop()
        if isinstance(node, Split):
            yield node
            stack.extend((node.right, node.left))


def importances(t: Tree) -> np.ndarray:
    """Sample-weighted Gini decrease per feature, normalized to sum 1.

    A single-leaf tree gives all zeros.
    """
    total = t.root.n_samples
    imp = np.zeros(t.n_features)
    for s in iter_splits(t.root):
        imp[s.feature] += s.n_samples / total * s.impurity_decrease
    norm = imp.sum()
    return imp / norm if norm > 0 else imp


def to_dict(node: Node) -> dict:
    """Debug dump; not a stable format."""
    if isinstance(node, Leaf):
        return {"leaf": node.label, "counts": list(node.class_counts)}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "impurity_decrease": node.impurity_decrease,
        "counts": list(node.class_counts),
        "left": to_dict(node.left),
        "right": to_dict(node.right),
    }


def depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(depth(node.left), depth(node.right))
