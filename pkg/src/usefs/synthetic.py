"""Imbalanced mixed-type datasets with planted signal and controlled missingness."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .data_model import Column, ColumnKind, Dataset, write_csv, write_schema
from .seeding import sub_rng

CATEGORY_LABELS = ("a", "b", "c")


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator settings.

    ``missing_profile`` is either one rate per feature (in final column
    order) or a ``(min_rate, max_rate)`` ramp. Under ``missing_mode="mcar"``
    the ramp runs linearly across column index. Under ``"informative"`` the
    ramp is laid out so that missingness tracks class-informativeness:
    informative features receive the upper half of the ramp and noise
    features are spread over the whole ramp, so the useful features are also
    the heavily imputed ones.
    """

    n_pos: int = 60
    n_neg: int = 540
    n_informative: int = 20
    n_noise_numerical: int = 150
    n_noise_categorical: int = 30
    effect_size: float = 1.5
    missing_profile: tuple[float, float] | Sequence[float] = (0.0, 0.5)
    missing_mode: str = "mcar"
    label_noise: float = 0.0
    seed: int = 0

    @property
    def n_features(self) -> int:
        return self.n_informative + self.n_noise_numerical + self.n_noise_categorical

    def validate(self) -> None:
        if self.n_pos < 1:
            raise ValueError("n_pos must be >= 1")
        if self.n_neg < self.n_pos:
            raise ValueError("n_neg must be >= n_pos")
        if min(self.n_informative, self.n_noise_numerical, self.n_noise_categorical) < 0:
            raise ValueError("feature counts must be >= 0")
        if self.n_features < 1:
            raise ValueError("spec produces no features")
        if not 0.0 <= self.label_noise <= 1.0:
            raise ValueError("label_noise must lie in [0, 1]")
        if self.missing_mode not in ("mcar", "informative"):
            raise ValueError(f"unknown missing_mode {self.missing_mode!r}")
        prof = list(self.missing_profile)
        if not _is_ramp(self.missing_profile, self.n_features) and len(prof) != self.n_features:
            raise ValueError("missing_profile needs one rate per feature or a (min, max) ramp")
        if any(not 0.0 <= r < 1.0 for r in prof):
            raise ValueError("missing rates must lie in [0, 1)")
        if _is_ramp(self.missing_profile, self.n_features) and prof[0] > prof[1]:
            raise ValueError("ramp must be (min_rate, max_rate)")


@dataclass(frozen=True)
class GroundTruth:
    informative_features: list[int]
    true_missing_rates: list[float]

    def to_dict(self) -> dict:
        return asdict(self)


def _is_ramp(profile, n_features: int) -> bool:
    return isinstance(profile, tuple) and len(profile) == 2


def _missing_rates(spec: SyntheticSpec, informative: np.ndarray) -> np.ndarray:
    F = spec.n_features
    if not _is_ramp(spec.missing_profile, F):
        return np.asarray(spec.missing_profile, dtype=float)
    lo, hi = spec.missing_profile
    if spec.missing_mode == "mcar":
        return np.linspace(lo, hi, F) if F > 1 else np.array([lo])
    rates = np.empty(F)
    is_inf = np.zeros(F, dtype=bool)
    is_inf[informative] = True
    mid = (lo + hi) / 2.0
    n_inf = int(is_inf.sum())
    rates[is_inf] = np.linspace(mid, hi, n_inf) if n_inf > 1 else lo
    n_noise = F - n_inf
    rates[~is_inf] = np.linspace(lo, hi, n_noise) if n_noise > 1 else lo
    return rates


def generate(spec: SyntheticSpec) -> tuple[Dataset, GroundTruth]:
    """Draw a dataset; identical specs give bit-identical output."""
    spec.validate()
    rng = sub_rng(spec.seed, 0)
    n = spec.n_pos + spec.n_neg
    F = spec.n_features
    y_true = rng.permutation(np.r_[np.ones(spec.n_pos, dtype=np.int64), np.zeros(spec.n_neg, dtype=np.int64)])

    # informative features land at random column positions so that
    # lower-index tie-breaking cannot favour them
    kinds = np.array(
        ["inf"] * spec.n_informative + ["num"] * spec.n_noise_numerical + ["cat"] * spec.n_noise_categorical
    )
    kinds = kinds[rng.permutation(F)]
    informative = np.flatnonzero(kinds == "inf")

    values = np.empty((n, F))
    shift = (y_true - 0.5) * spec.effect_size
    for j, kind in enumerate(kinds):
        if kind == "inf":
            values[:, j] = rng.normal(size=n) + shift
        elif kind == "num":
            values[:, j] = rng.normal(size=n)
        else:
            values[:, j] = rng.integers(0, len(CATEGORY_LABELS), size=n)

    flip = rng.random(n) < spec.label_noise
    y = np.where(flip, 1 - y_true, y_true)

    rates = _missing_rates(spec, informative)
    mask = rng.random((n, F)) < rates[None, :]
    values[mask] = np.nan

    width = len(str(F - 1))
    columns = tuple(
        Column(f"x{j:0{width}d}", ColumnKind.CATEGORICAL if kind == "cat" else ColumnKind.NUMERICAL)
        for j, kind in enumerate(kinds)
    )
    maps = {c.name: CATEGORY_LABELS for c in columns if c.kind is ColumnKind.CATEGORICAL}
    d = Dataset(columns, values, y, maps)
    return d, GroundTruth([int(j) for j in informative], [float(r) for r in rates])


def write(spec: SyntheticSpec, out_dir: str | Path, stem: str = "synthetic") -> dict[str, Path]:
    """Generate and write ``<stem>.csv``, ``<stem>.schema`` and ``<stem>.truth.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    d, truth = generate(spec)
    paths = {
        "csv": out_dir / f"{stem}.csv",
        "schema": out_dir / f"{stem}.schema",
        "truth": out_dir / f"{stem}.truth.json",
    }
    write_csv(paths["csv"], d)
    write_schema(paths["schema"], d)
    payload = truth.to_dict() | {"informative_names": [d.columns[j].name for j in truth.informative_features]}
    payload["spec"] = asdict(spec) | {"missing_profile": list(spec.missing_profile)}
    paths["truth"].write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return paths
