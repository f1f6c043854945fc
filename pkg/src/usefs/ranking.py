"""Recursive feature elimination over CART importances."""

from __future__ import annotations

import numpy as np

from . import cart


def rfe_rank(x, y, step: int = 1, **tree_params) -> np.ndarray:
    """Full feature ranking, 1 = best.

    Each round fits a tree on the surviving features and eliminates the
    ``step`` least important ones (higher original index first on ties);
    they take the worst ranks still free. When at most ``step`` features
    remain, or every importance is zero, the survivors are ranked by
    importance descending, index ascending.

    Dropping a feature the tree never split on leaves the refitted tree
    unchanged (the split search is deterministic and that feature never won),
    so the refit is skipped while only zero-importance features are removed.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ValueError("rfe_rank needs at least one feature")
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    n_feat = x.shape[1]
    ranks = np.zeros(n_feat, dtype=np.int64)
    surviving = np.arange(n_feat)
    imp = None
    next_worst = n_feat
    while True:
        if imp is None:
            imp = cart.importances(cart.fit(x[:, surviving], y, **tree_params))
        if surviving.size <= step or not imp.any():
            order = np.lexsort((surviving, -imp))
            ranks[surviving[order]] = np.arange(1, surviving.size + 1)
            return ranks
        # ascending importance, then descending index
        order = np.lexsort((-surviving, imp))
        drop = order[:step]
        for j in drop:
            ranks[surviving[j]] = next_worst
            next_worst -= 1
        keep = np.ones(surviving.size, dtype=bool)
        keep[drop] = False
        reuse = not imp[drop].any()
        surviving = surviving[keep]
        imp = imp[keep] if reuse else None
