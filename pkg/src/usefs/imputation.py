"""Mean-based and similarity-based (kNN) imputation for mixed-type tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import ColumnKind, Dataset, encode_for_similarity


class ImputationError(ValueError):
    pass


@dataclass(frozen=True)
class MeanBased:
    pass


@dataclass(frozen=True)
class SimilarityBased:
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


ImputationMethod = MeanBased | SimilarityBased


def _check_no_empty_columns(d: Dataset) -> None:
    empty = np.flatnonzero(d.missing.all(axis=0))
    if empty.size:
        names = [d.columns[j].name for j in empty]
        raise ImputationError(
            f"columns {names} have no present cells; filter by completion rate first"
        )


def _nearest_category(mean: float, n_categories: int) -> int:
    ids = np.arange(n_categories)
    # argmin returns the first minimum, i.e. the smaller id on a tie
    return int(np.argmin(np.abs(ids - mean)))


def impute_mean(d: Dataset) -> Dataset:
    """Fill numerical cells with the column mean, categorical cells with the
    category id nearest to the mean id (ties go to the smaller id)."""
    _check_no_empty_columns(d)
    values = d.values.copy()
    miss = d.missing
    for j, col in enumerate(d.columns):
        if not miss[:, j].any():
            continue
        mean = values[~miss[:, j], j].mean()
        if col.kind is ColumnKind.CATEGORICAL:
            values[miss[:, j], j] = _nearest_category(mean, d.n_categories(j))
        else:
            values[miss[:, j], j] = mean
    return d.with_values(values)


def similarity(x: np.ndarray, y: np.ndarray) -> float:
    """Dot product over co-present entries divided by their count.

    ``NaN`` marks a missing entry. Returns 0.0 when nothing is co-present.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    both = ~(np.isnan(x) | np.isnan(y))
    n = int(both.sum())
    if n == 0:
        return 0.0
    return float(np.sum(x[both] * y[both]) / n)


def similarity_to_all(encoded: np.ndarray, r: int) -> np.ndarray:
    """Similarity of row ``r`` against every row of ``encoded``."""
    present = ~np.isnan(encoded)
    filled = np.where(present, encoded, 0.0)
    both = present & present[r]
    n = both.sum(axis=1)
    dots = (filled * filled[r]).sum(axis=1)
    out = np.zeros(encoded.shape[0])
    np.divide(dots, n, out=out, where=n > 0)
    return out


def impute_similarity(d: Dataset, k: int = 5) -> Dataset:
    """k-nearest-neighbour imputation using the co-present dot-product similarity.

    For each missing cell (row r, feature f), the k rows with f present that
    are most similar to r donate: their mean for numerical features, their
    majority category for categorical ones (smaller id wins ties). Similarity
    ties rank the lower row index first. All fills read the original table,
    so the order in which cells are visited does not matter.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if d.n_rows < k + 1:
        raise ImputationError(f"need at least k+1={k + 1} rows, got {d.n_rows}")
    _check_no_empty_columns(d)

    enc = encode_for_similarity(d).values
    miss = d.missing
    original = d.values
    values = original.copy()
    rows_idx = np.arange(d.n_rows)
    for r in np.flatnonzero(miss.any(axis=1)):
        sims = similarity_to_all(enc, r)
        # descending similarity, then ascending row index
        order = np.lexsort((rows_idx, -sims))
        order = order[order != r]
        for f in np.flatnonzero(miss[r]):
            donors = order[~miss[order, f]][:k]
            if donors.size == 0:
                raise ImputationError(
                    f"no donor rows for column {d.columns[f].name!r}; filter by completion rate first"
                )
            donated = original[donors, f]
            if d.columns[f].kind is ColumnKind.CATEGORICAL:
                counts = np.bincount(donated.astype(np.int64), minlength=d.n_categories(f))
                values[r, f] = int(np.argmax(counts))
            else:
                values[r, f] = donated.mean()
    return d.with_values(values)


def impute(d: Dataset, method: ImputationMethod) -> Dataset:
    if isinstance(method, MeanBased):
        return impute_mean(d)
    if isinstance(method, SimilarityBased):
        return impute_similarity(d, method.k)
    raise TypeError(f"unknown imputation method {method!r}")


def fill_counts(before: Dataset, after: Dataset) -> dict[str, int]:
    """Number of cells filled per feature."""
    filled = before.missing & ~after.missing
    return {c.name: int(n) for c, n in zip(before.columns, filled.sum(axis=0))}
