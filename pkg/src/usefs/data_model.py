"""Typed tabular container with missing-value tracking.

Cells are stored as a float matrix where ``NaN`` marks a missing cell.
Categorical cells hold dense category ids (as floats), with the id <-> label
bijection kept in ``category_maps``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MISSING_TOKENS = ("", "NA")


class IngestionError(ValueError):
    """Raised when a CSV or schema file cannot be turned into a Dataset."""


class DegenerateDatasetError(ValueError):
    """Raised when an operation would leave no rows or no feature columns."""


class ColumnKind(enum.Enum):
    NUMERICAL = "num"
    CATEGORICAL = "cat"


@dataclass(frozen=True)
class Column:
    name: str
    kind: ColumnKind


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature table plus binary outcome.

    Parameters
    ----------
    columns : tuple of Column
        Feature columns in stable order.
    values : ndarray, shape (n_rows, n_features)
        Float cells, ``NaN`` where missing. Categorical cells are ids.
    outcome : ndarray of int, shape (n_rows,)
        1 for the positive (minority) class, 0 otherwise.
    category_maps : dict
        Column name -> tuple of labels; the label at position ``i`` has id ``i``.
    """

    columns: tuple[Column, ...]
    values: np.ndarray
    outcome: np.ndarray
    category_maps: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        outcome = np.asarray(self.outcome).astype(np.int64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D array")
        if values.shape[0] < 1:
            raise DegenerateDatasetError("dataset has no rows")
        if values.shape[1] != len(self.columns):
            raise ValueError(
                f"{values.shape[1]} value columns but {len(self.columns)} column declarations"
            )
        if outcome.shape != (values.shape[0],):
            raise ValueError("outcome must have one entry per row")
        if not np.isin(outcome, (0, 1)).all():
            raise ValueError("outcome must be binary 0/1")
        for j, col in enumerate(self.columns):
            if col.kind is ColumnKind.CATEGORICAL:
                labels = self.category_maps.get(col.name)
                if labels is None:
                    raise ValueError(f"categorical column {col.name!r} has no category map")
                present = values[~np.isnan(values[:, j]), j]
                if present.size and (
                    present.min() < 0
                    or present.max() >= len(labels)
                    or not np.all(present == np.round(present))
                ):
                    raise ValueError(f"column {col.name!r} holds invalid category ids")
        values.setflags(write=False)
        outcome.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "outcome", outcome)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def missing(self) -> np.ndarray:
        """Boolean mask, True where a cell is missing."""
        return np.isnan(self.values)

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def is_categorical(self) -> np.ndarray:
        return np.array([c.kind is ColumnKind.CATEGORICAL for c in self.columns], dtype=bool)

    def n_categories(self, j: int) -> int:
        return len(self.category_maps[self.columns[j].name])

    def take(self, rows=None, cols=None) -> "Dataset":
        """Subset by row and/or column indices (or boolean masks)."""
        rows = np.arange(self.n_rows) if rows is None else np.asarray(rows)
        cols = np.arange(self.n_features) if cols is None else np.asarray(cols)
        if rows.dtype == bool:
            rows = np.flatnonzero(rows)
        if cols.dtype == bool:
            cols = np.flatnonzero(cols)
        columns = tuple(self.columns[j] for j in cols)
        maps = {c.name: self.category_maps[c.name] for c in columns if c.kind is ColumnKind.CATEGORICAL}
        return Dataset(columns, self.values[np.ix_(rows, cols)], self.outcome[rows], maps)

    def with_values(self, values: np.ndarray) -> "Dataset":
        return Dataset(self.columns, values, self.outcome, self.category_maps)

    def labels_for(self, j: int) -> list[str]:
        """Render column ``j`` back to strings (missing -> empty string)."""
        col = self.columns[j]
        out = []
        for v in self.values[:, j]:
            if np.isnan(v):
                out.append("")
            elif col.kind is ColumnKind.CATEGORICAL:
                out.append(self.category_maps[col.name][int(v)])
            else:
                out.append(repr(float(v)))
        return out


@dataclass(frozen=True)
class CompletionStats:
    per_feature_missing_rate: np.ndarray
    per_row_missing_rate: np.ndarray


@dataclass(frozen=True)
class Schema:
    """Parsed ``name,kind`` schema; kinds are num, cat, outcome or drop."""

    kinds: dict[str, str]

    @property
    def outcome_column(self) -> str | None:
        names = [n for n, k in self.kinds.items() if k == "outcome"]
        if len(names) > 1:
            raise IngestionError(f"schema declares more than one outcome column: {names}")
        return names[0] if names else None


_SCHEMA_KINDS = {"num", "cat", "outcome", "drop"}


def read_schema(path: str | Path) -> Schema:
    kinds: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 2:
                raise IngestionError(f"{path}:{lineno}: expected 'name,kind', got {row!r}")
            name, kind = row[0].strip(), row[1].strip().lower()
            if kind not in _SCHEMA_KINDS:
                raise IngestionError(f"{path}:{lineno}: unknown kind {kind!r}")
            if name in kinds:
                raise IngestionError(f"{path}:{lineno}: column {name!r} declared twice")
            kinds[name] = kind
    return Schema(kinds)


def write_schema(path: str | Path, d: Dataset, outcome_column: str = "outcome") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for c in d.columns:
            w.writerow([c.name, c.kind.value])
        w.writerow([outcome_column, "outcome"])


def ingest_csv(
    path: str | Path,
    schema: Schema | dict[str, str],
    outcome_column: str | None = None,
    positive_label: str = "1",
    missing_tokens: Iterable[str] = DEFAULT_MISSING_TOKENS,
) -> Dataset:
    """Load a CSV into a Dataset.

    Every CSV column must be declared in ``schema``. Numerical cells must
    parse as finite decimals unless they match one of ``missing_tokens``.
    Categorical labels get dense ids in order of first appearance. The
    outcome is 1 where the cell equals ``positive_label``.
    """
    if isinstance(schema, dict):
        schema = Schema(dict(schema))
    outcome_column = outcome_column or schema.outcome_column
    if outcome_column is None:
        raise IngestionError("no outcome column given or declared in schema")
    missing_tokens = set(missing_tokens)

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError(f"{path}: empty file, header row required") from None
        rows = list(reader)

    unknown = [n for n in schema.kinds if n not in header and n != outcome_column]
    if unknown:
        raise IngestionError(f"schema names columns absent from {path}: {unknown}")
    if outcome_column not in header:
        raise IngestionError(f"outcome column {outcome_column!r} not in {path}")
    undeclared = [h for h in header if h not in schema.kinds and h != outcome_column]
    if undeclared:
        raise IngestionError(f"columns in {path} missing from schema: {undeclared}")

    out_idx = header.index(outcome_column)
    feat_idx = [
        i for i, h in enumerate(header)
        if i != out_idx and schema.kinds[h] in ("num", "cat")
    ]
    columns = tuple(
        Column(header[i], ColumnKind.NUMERICAL if schema.kinds[header[i]] == "num" else ColumnKind.CATEGORICAL)
        for i in feat_idx
    )
    values = np.full((len(rows), len(feat_idx)), np.nan)
    outcome = np.zeros(len(rows), dtype=np.int64)
    cat_ids: dict[str, dict[str, int]] = {c.name: {} for c in columns if c.kind is ColumnKind.CATEGORICAL}

    for r, row in enumerate(rows):
        line = r + 2
        if len(row) != len(header):
            raise IngestionError(f"{path}: line {line} has {len(row)} fields, expected {len(header)}")
        label = row[out_idx].strip()
        if label in missing_tokens:
            raise IngestionError(f"{path}: line {line}: outcome {outcome_column!r} is missing")
        outcome[r] = int(label == positive_label)
        for j, (i, col) in enumerate(zip(feat_idx, columns)):
            cell = row[i].strip()
            if cell in missing_tokens:
                continue
            if col.kind is ColumnKind.NUMERICAL:
                try:
                    v = float(cell)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise IngestionError(
                        f"{path}: line {line}, column {col.name!r}: cannot parse {cell!r} as a number"
                    )
                values[r, j] = v
            else:
                ids = cat_ids[col.name]
                values[r, j] = ids.setdefault(cell, len(ids))

    if not rows:
        raise DegenerateDatasetError(f"{path}: no data rows")
    maps = {name: tuple(ids) for name, ids in cat_ids.items()}
    return Dataset(columns, values, outcome, maps)


def write_csv(path: str | Path, d: Dataset, outcome_column: str = "outcome") -> None:
    """Write ``d`` as CSV; missing cells become empty fields, outcome as 0/1."""
    rendered = [d.labels_for(j) for j in range(d.n_features)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(d.feature_names + [outcome_column])
        for r in range(d.n_rows):
            w.writerow([col[r] for col in rendered] + [str(int(d.outcome[r]))])


def completion_stats(d: Dataset) -> CompletionStats:
    miss = d.missing
    return CompletionStats(miss.mean(axis=0), miss.mean(axis=1))


def filter_by_completion(d: Dataset, p: float, max_passes: int | None = None) -> Dataset:
    """Drop sparse features, then sparse rows.

    A feature survives when its completion rate (1 - missing rate) is at
    least ``p``; rows are then judged over the surviving features only.
    Dropping rows can push a column back under ``p``, so the column-then-row
    pass repeats until nothing changes (or ``max_passes`` is reached). The
    result then meets ``p`` on both axes and filtering it again is a no-op.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"completion threshold must lie in [0, 1], got {p}")
    rows = np.arange(d.n_rows)
    cols = np.arange(d.n_features)
    miss = d.missing
    passes = 0
    while max_passes is None or passes < max_passes:
        passes += 1
        sub = miss[np.ix_(rows, cols)]
        keep_cols = (1.0 - sub.mean(axis=0)) >= p
        if not keep_cols.any():
            raise DegenerateDatasetError(f"no feature column reaches completion rate {p}")
        keep_rows = (1.0 - sub[:, keep_cols].mean(axis=1)) >= p
        if not keep_rows.any():
            raise DegenerateDatasetError(f"no row reaches completion rate {p}")
        if keep_cols.all() and keep_rows.all():
            break
        rows, cols = rows[keep_rows], cols[keep_cols]
    return d.take(rows, cols)


@dataclass(frozen=True)
class Encoded:
    """Similarity encoding: values in [0, 1] with NaN for missing cells.

    ``source[c]`` is the index of the original feature behind derived column ``c``.
    """

    values: np.ndarray
    source: np.ndarray

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)


def encode_for_similarity(d: Dataset) -> Encoded:
    """Min-max normalize numerical columns and one-hot expand categorical ones."""
    blocks: list[np.ndarray] = []
    source: list[int] = []
    for j, col in enumerate(d.columns):
        x = d.values[:, j]
        miss = np.isnan(x)
        if col.kind is ColumnKind.NUMERICAL:
            out = np.full(x.shape, np.nan)
            if (~miss).any():
                lo, hi = np.nanmin(x), np.nanmax(x)
                # constant columns carry no similarity information
                out[~miss] = (x[~miss] - lo) / (hi - lo) if hi > lo else 0.0
            blocks.append(out[:, None])
            source.append(j)
        else:
            c = d.n_categories(j)
            out = np.zeros((d.n_rows, c))
            ids = x[~miss].astype(np.int64)
            out[np.flatnonzero(~miss), ids] = 1.0
            out[miss] = np.nan
            blocks.append(out)
            source.extend([j] * c)
    values = np.hstack(blocks) if blocks else np.empty((d.n_rows, 0))
    return Encoded(values, np.asarray(source, dtype=np.int64))


def feature_matrix(d: Dataset) -> np.ndarray:
    """Plain float matrix for tree fitting (categorical ids as ordinals)."""
    return np.asarray(d.values)


def from_arrays(
    x: np.ndarray,
    y: Sequence[int],
    names: Sequence[str] | None = None,
    categorical: dict[str, Sequence[str]] | None = None,
) -> Dataset:
    """Convenience constructor; columns named in ``categorical`` are categorical."""
    x = np.asarray(x, dtype=float)
    names = list(names) if names is not None else [f"f{j}" for j in range(x.shape[1])]
    categorical = {k: tuple(v) for k, v in (categorical or {}).items()}
    columns = tuple(
        Column(n, ColumnKind.CATEGORICAL if n in categorical else ColumnKind.NUMERICAL) for n in names
    )
    return Dataset(columns, x, np.asarray(y), categorical)
