"""Brute-force reference implementations used only by the tests.

These are written independently of the package: plain Python loops,
exact rational arithmetic where ties matter, no shared helpers.
"""

from __future__ import annotations

import math
from fractions import Fraction


# --- metrics ---------------------------------------------------------------

def auc_pairs(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def auc_trapezoid(scores, labels):
    """Area under the ROC polyline, sweeping thresholds from high to low."""
    n_pos = sum(1 for l in labels if l == 1)
    n_neg = len(labels) - n_pos
    pts = [(0.0, 0.0)]
    for t in sorted(set(scores), reverse=True):
        tp = sum(1 for s, l in zip(scores, labels) if s >= t and l == 1)
        fp = sum(1 for s, l in zip(scores, labels) if s >= t and l == 0)
        pts.append((fp / n_neg, tp / n_pos))
    area = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


# --- CART ------------------------------------------------------------------

def _gini_exact(labels):
    n = len(labels)
    if n == 0:
        return Fraction(0)
    p = Fraction(sum(labels), n)
    return 1 - p * p - (1 - p) * (1 - p)


def brute_tree(x, y, max_depth=None, min_samples_split=2, depth=0):
    """Nested tuples: ('leaf', label) or ('split', feat, thr, left, right)."""
    n = len(y)
    n_pos = sum(y)
    if n_pos in (0, n) or n < min_samples_split or (max_depth is not None and depth >= max_depth):
        return ("leaf", 1 if n_pos * 2 > n else 0)
    parent = _gini_exact(y)
    best = None
    for f in range(len(x[0])):
        vals = sorted(set(row[f] for row in x))
        for a, b in zip(vals, vals[1:]):
            thr = (a + b) / 2.0
            left = [y[i] for i in range(n) if x[i][f] <= thr]
            right = [y[i] for i in range(n) if x[i][f] > thr]
            weighted = Fraction(len(left), n) * _gini_exact(left) + Fraction(len(right), n) * _gini_exact(right)
            if best is None or weighted < best[0]:
                best = (weighted, f, thr)
    if best is None or not best[0] < parent:
        return ("leaf", 1 if n_pos * 2 > n else 0)
    _, f, thr = best
    li = [i for i in range(n) if x[i][f] <= thr]
    ri = [i for i in range(n) if x[i][f] > thr]
    return (
        "split", f, thr,
        brute_tree([x[i] for i in li], [y[i] for i in li], max_depth, min_samples_split, depth + 1),
        brute_tree([x[i] for i in ri], [y[i] for i in ri], max_depth, min_samples_split, depth + 1),
    )


def brute_predict(tree, row):
    while tree[0] == "split":
        _, f, thr, left, right = tree
        tree = left if row[f] <= thr else right
    return tree[1]


# --- aggregation -----------------------------------------------------------

def _pick(scores, k, higher):
    idx = sorted(range(len(scores)), key=lambda j: ((-scores[j] if higher else scores[j]), j))
    return idx[:k]


def brute_cla(ranks, k):
    F = len(ranks[0])
    s = [0.0] * F
    for r in ranks:
        for f in range(F):
            s[f] += r[f]
    return s, _pick(s, k, False)


def brute_wma(ranks, aucs, k):
    F = len(ranks[0])
    s = [0.0] * F
    for r, a in zip(ranks, aucs):
        for f in range(F):
            s[f] += (1.0 - a) * r[f]
    return s, _pick(s, k, False)


def brute_weighted_count(sets, weight_of, F, k):
    s = [0.0] * F
    for w, members in enumerate(sets):
        for f in range(F):
            if f in members:
                s[f] += weight_of(w, f)
    return s, _pick(s, k, True)


# --- imputation ------------------------------------------------------------

def brute_encode(table, kinds, n_cats):
    """table: list of rows with None for missing; returns list of encoded rows (None = missing)."""
    rows = len(table)
    enc = [[] for _ in range(rows)]
    for j, kind in enumerate(kinds):
        col = [table[r][j] for r in range(rows)]
        if kind == "num":
            present = [v for v in col if v is not None]
            lo, hi = min(present), max(present)
            for r in range(rows):
                v = col[r]
                enc[r].append(None if v is None else (0.0 if hi == lo else (v - lo) / (hi - lo)))
        else:
            for r in range(rows):
                v = col[r]
                for c in range(n_cats[j]):
                    enc[r].append(None if v is None else (1.0 if int(v) == c else 0.0))
    return enc


def brute_similarity(a, b):
    num, n = 0.0, 0
    for x, y in zip(a, b):
        if x is not None and y is not None:
            num += x * y
            n += 1
    return 0.0 if n == 0 else num / n


def brute_knn_impute(table, kinds, n_cats, k):
    enc = brute_encode(table, kinds, n_cats)
    out = [list(r) for r in table]
    rows = len(table)
    for r in range(rows):
        for f in range(len(kinds)):
            if table[r][f] is not None:
                continue
            cands = [i for i in range(rows) if i != r and table[i][f] is not None]
            sims = {i: brute_similarity(enc[r], enc[i]) for i in cands}
            cands.sort(key=lambda i: (-sims[i], i))
            donors = [table[i][f] for i in cands[:k]]
            if kinds[f] == "num":
                out[r][f] = sum(donors) / len(donors)
            else:
                counts = [donors.count(float(c)) for c in range(n_cats[f])]
                out[r][f] = float(counts.index(max(counts)))
    return out


# --- entropy ---------------------------------------------------------------

def entropy_bits(counts):
    total = sum(counts)
    return -sum(c / total * math.log2(c / total) for c in counts if c > 0)


def brute_entropy_delta(before_col, after_col, kind, n_cat=None, bins=10):
    b = [v for v in before_col if v is not None]
    a = list(after_col)
    if kind == "cat":
        hb = entropy_bits([b.count(float(c)) for c in range(n_cat)])
        ha = entropy_bits([a.count(float(c)) for c in range(n_cat)])
        return abs(ha - hb)
    lo, hi = min(a + b), max(a + b)
    if lo == hi:
        return 0.0
    width = (hi - lo) / bins

    def hist(vals):
        counts = [0] * bins
        for v in vals:
            i = int((v - lo) / width)
            counts[min(max(i, 0), bins - 1)] += 1
        return counts

    return abs(entropy_bits(hist(a)) - entropy_bits(hist(b)))
