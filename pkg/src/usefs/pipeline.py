"""End-to-end driver: ingest -> filter -> impute -> select -> evaluate -> report.

A single master seed fans out to every stochastic stage (synthetic data,
way sampling, fold dealing); nothing reads the clock or ambient randomness,
so artifacts are byte-identical across runs with the same config.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import aggregation, data_model, ensemble, imputation, synthetic
from .aggregation import VarianceWeightParams
from .data_model import Dataset
from .ensemble import EnsembleConfig

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    """A module error tagged with the pipeline stage it came from."""

    def __init__(self, stage: str, err: Exception):
        super().__init__(f"[{stage}] {type(err).__name__}: {err}")
        self.stage = stage
        self.err = err


@dataclass(frozen=True)
class PipelineConfig:
    data: str | None = None
    schema: str | None = None
    outcome_column: str | None = None
    positive_label: str = "1"
    missing_tokens: tuple[str, ...] = data_model.DEFAULT_MISSING_TOKENS
    completion_threshold: float = 0.5
    imputation: str = "mean"
    knn_k: int = 5
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    maa_params: VarianceWeightParams = aggregation.MAA_DEFAULT
    eaa_params: VarianceWeightParams = aggregation.EAA_DEFAULT
    entropy_bins: int = 10
    synth: synthetic.SyntheticSpec | None = None
    out_dir: str = "out"

    def __post_init__(self):
        if not 0.0 <= self.completion_threshold <= 1.0:
            raise ConfigError(f"completion_threshold must lie in [0, 1], got {self.completion_threshold}")
        if self.imputation not in ("mean", "knn"):
            raise ConfigError(f"imputation must be 'mean' or 'knn', got {self.imputation!r}")
        if self.knn_k < 1:
            raise ConfigError("knn_k must be >= 1")
        if self.entropy_bins < 1:
            raise ConfigError("entropy_bins must be >= 1")
        if self.data is not None and self.schema is None:
            raise ConfigError("a data file needs a schema file")
        for path in (self.data, self.schema):
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"file not found: {path}")

    @property
    def seed(self) -> int:
        return self.ensemble.seed

    @property
    def method(self) -> str:
        return self.ensemble.aggregation

    def imputation_method(self) -> imputation.ImputationMethod:
        if self.imputation == "knn":
            return imputation.SimilarityBased(self.knn_k)
        return imputation.MeanBased()

    def synthetic_spec(self) -> synthetic.SyntheticSpec:
        """The synthetic spec in effect, re-seeded from the master seed."""
        return replace(self.synth or synthetic.SyntheticSpec(), seed=self.seed)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["missing_tokens"] = list(self.missing_tokens)
        if self.data is None:
            spec = asdict(self.synthetic_spec())
            spec["missing_profile"] = list(spec["missing_profile"])
            out["synth"] = spec
        return out


_ENSEMBLE_KEYS = {f.name for f in fields(EnsembleConfig)}
_SYNTH_KEYS = {f.name for f in fields(synthetic.SyntheticSpec)}
_TOP_KEYS = {
    "data", "schema", "outcome_column", "positive_label", "missing_tokens",
    "completion_threshold", "imputation", "knn_k", "entropy_bins", "out_dir",
    "maa_alpha", "maa_beta", "eaa_alpha", "eaa_beta",
}


def _coerce(raw: str) -> Any:
    raw = raw.strip()
    if raw.lower() in ("none", "null"):
        return None
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw.strip("'\"")


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Parse ``key = value`` lines; ``[synth]`` starts the synthetic-spec section.

    Values are read as JSON where possible (numbers, lists, quoted strings),
    otherwise as bare strings. ``#`` starts a comment line.
    """
    out: dict[str, Any] = {}
    section = None
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section != "synth":
                raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
            out.setdefault("synth", {})
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if section == "synth":
            out["synth"][key] = _coerce(value)
        else:
            out[key] = _coerce(value)
    return out


def build_config(settings: dict[str, Any]) -> PipelineConfig:
    """PipelineConfig from a flat mapping (config file merged with CLI overrides)."""
    unknown = set(settings) - _TOP_KEYS - _ENSEMBLE_KEYS - {"synth"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        ens = EnsembleConfig(**{k: v for k, v in settings.items() if k in _ENSEMBLE_KEYS})
        synth = None
        if settings.get("synth"):
            spec = dict(settings["synth"])
            bad = set(spec) - _SYNTH_KEYS
            if bad:
                raise ConfigError(f"unknown [synth] keys: {sorted(bad)}")
            if "missing_profile" in spec:
                prof = spec["missing_profile"]
                spec["missing_profile"] = tuple(prof) if len(prof) == 2 else list(prof)
            synth = synthetic.SyntheticSpec(**spec)
            synth.validate()
        top = {k: v for k, v in settings.items() if k in _TOP_KEYS}
        maa_p = VarianceWeightParams(top.pop("maa_alpha", 1.0), top.pop("maa_beta", 2.0))
        eaa_p = VarianceWeightParams(top.pop("eaa_alpha", 0.5), top.pop("eaa_beta", 2.0))
        if "missing_tokens" in top:
            top["missing_tokens"] = tuple(top["missing_tokens"])
        for key in ("data", "schema", "outcome_column", "positive_label", "out_dir", "imputation"):
            if key in top and top[key] is not None:
                top[key] = str(top[key])
        return PipelineConfig(ensemble=ens, synth=synth, maa_params=maa_p, eaa_params=eaa_p, **top)
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from err


@contextmanager
def _stage(name: str):
    try:
        yield
    except (StageError, ConfigError):
        raise
    except Exception as err:
        raise StageError(name, err) from err


def load_dataset(config: PipelineConfig) -> Dataset:
    with _stage("ingest"):
        if config.data is not None:
            schema = data_model.read_schema(config.schema)
            return data_model.ingest_csv(
                config.data, schema, config.outcome_column, config.positive_label, config.missing_tokens
            )
        return synthetic.generate(config.synthetic_spec())[0]


@dataclass
class Prepared:
    """A filtered table before and after imputation plus its diagnostics."""

    filtered: Dataset
    imputed: Dataset
    missing_rates: np.ndarray
    entropy_deltas: np.ndarray


def prepare(d: Dataset, config: PipelineConfig, threshold: float | None = None) -> Prepared:
    p = config.completion_threshold if threshold is None else threshold
    with _stage("filter"):
        filtered = data_model.filter_by_completion(d, p)
    with _stage("impute"):
        rates = data_model.completion_stats(filtered).per_feature_missing_rate
        imputed = imputation.impute(filtered, config.imputation_method())
        deltas = aggregation.entropy_delta(filtered, imputed, config.entropy_bins)
    return Prepared(filtered, imputed, rates, deltas)


def fit_selection_ways(prep: Prepared, cfg: EnsembleConfig) -> list[ensemble.WayModel]:
    with _stage("select"):
        ways = ensemble.make_ways(prep.imputed, cfg.n_ways, cfg.seed)
        return ensemble.fit_ways(prep.imputed, ways, cfg)


def aggregate(prep: Prepared, models, config: PipelineConfig, method: str) -> aggregation.AggregateScores:
    with _stage("select"):
        return ensemble.aggregate_ways(
            models,
            method,
            config.ensemble.n_features,
            missing_rates=prep.missing_rates,
            deltas=prep.entropy_deltas,
            occurrence_weight=config.ensemble.occurrence_weight,
            maa_params=config.maa_params,
            eaa_params=config.eaa_params,
        )


def selection_payload(prep: Prepared, scores: aggregation.AggregateScores) -> dict:
    names = prep.imputed.feature_names
    out = scores.to_dict(names)
    out["diagnostics"] = {
        "feature_names": names,
        "missing_rate": [float(v) for v in prep.missing_rates],
        "entropy_delta": [float(v) for v in prep.entropy_deltas],
        "mean_missing_rate_selected": float(np.mean(prep.missing_rates[scores.selected])),
        "mean_entropy_delta_selected": float(np.mean(prep.entropy_deltas[scores.selected])),
    }
    return out


def evaluate(prep: Prepared, selected: Sequence[int], cfg: EnsembleConfig):
    with _stage("evaluate"):
        return ensemble.evaluate(prep.imputed, selected, cfg, prep.missing_rates, prep.entropy_deltas)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def summary_text(config: PipelineConfig, prep: Prepared, selection: dict, report) -> str:
    lines = [
        f"rows x features after filtering: {prep.filtered.n_rows} x {prep.filtered.n_features}",
        f"positives / negatives: {int(prep.filtered.outcome.sum())} / {int((prep.filtered.outcome == 0).sum())}",
        f"completion threshold: {config.completion_threshold}",
        f"imputation: {config.imputation}",
        f"aggregation: {config.method}, ways: {config.ensemble.n_ways}, features: {config.ensemble.n_features}",
        f"selected: {', '.join(selection['selected_names'])}",
        f"accuracy: {report.accuracy:.4f}",
        f"AUC (vote fraction): {report.auc_score_based:.4f}",
        f"AUC (majority vote): {report.auc_vote_based:.4f}",
        f"confusion: {report.confusion}",
        f"mean missing rate of selected: {report.diagnostics['mean_missing_rate_selected']:.4f}",
        f"mean entropy change of selected: {report.diagnostics['mean_entropy_delta_selected']:.4f}",
    ]
    return "\n".join(lines) + "\n"


def run_pipeline(config: PipelineConfig, write: bool = True) -> dict:
    """Select features, evaluate them, and write the artifacts.

    Writes ``selected.json``, ``report.json`` and ``summary.txt`` into
    ``config.out_dir`` and returns them as a dict (plus the EvalReport).
    """
    d = load_dataset(config)
    prep = prepare(d, config)
    cfg = config.ensemble
    if config.method in aggregation.RANK_METHODS:
        cfg = replace(cfg, compute_ranks=True)
    models = fit_selection_ways(prep, cfg)
    scores = aggregate(prep, models, config, config.method)
    selection = selection_payload(prep, scores)
    report = evaluate(prep, scores.selected, config.ensemble)
    result = {
        "selection": selection,
        "report": report.to_dict(),
        "summary": summary_text(config, prep, selection, report),
        "eval_report": report,
    }
    if write:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "selected.json").write_text(dumps(selection))
        (out / "report.json").write_text(dumps(report.to_dict()))
        (out / "summary.txt").write_text(result["summary"])
    return result


BENCH_FIELDS = [
    "threshold", "method", "seed", "n_rows", "n_features",
    "accuracy", "auc", "auc_vote", "mean_missing_rate", "mean_entropy_delta",
]
SUMMARY_METRICS = ["accuracy", "auc", "auc_vote", "mean_missing_rate", "mean_entropy_delta"]


def run_bench(
    config: PipelineConfig,
    thresholds: Sequence[float],
    methods: Sequence[str],
    seeds: Sequence[int],
    write: bool = True,
) -> tuple[list[dict], list[dict]]:
    """Sweep completion thresholds x aggregation methods x seeds.

    Each (threshold, seed) pair fits its selection ways once and reuses them
    for every method, which gives the same numbers as separate
    ``run_pipeline`` calls. Returns (per-run rows, per-cell mean/sd rows),
    both ordered by (threshold, method, seed).
    """
    for m in methods:
        if m not in aggregation.METHODS:
            raise ConfigError(f"unknown aggregation method {m!r}")
    for p in thresholds:
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"threshold {p} outside [0, 1]")
    needs_ranks = any(m in aggregation.RANK_METHODS for m in methods)

    rows = []
    for seed in seeds:
        seeded = replace(config, ensemble=replace(config.ensemble, seed=seed))
        d = load_dataset(seeded)
        for p in thresholds:
            prep = prepare(d, seeded, p)
            cfg = replace(seeded.ensemble, compute_ranks=needs_ranks or None)
            models = fit_selection_ways(prep, cfg)
            for m in methods:
                scores = aggregate(prep, models, seeded, m)
                rep = evaluate(prep, scores.selected, seeded.ensemble)
                log.info("bench p=%s method=%s seed=%s auc=%.4f", p, m, seed, rep.auc_score_based)
                rows.append({
                    "threshold": p,
                    "method": m,
                    "seed": seed,
                    "n_rows": prep.imputed.n_rows,
                    "n_features": prep.imputed.n_features,
                    "accuracy": rep.accuracy,
                    "auc": rep.auc_score_based,
                    "auc_vote": rep.auc_vote_based,
                    "mean_missing_rate": rep.diagnostics["mean_missing_rate_selected"],
                    "mean_entropy_delta": rep.diagnostics["mean_entropy_delta_selected"],
                })
    method_pos = {m: i for i, m in enumerate(methods)}
    seed_pos = {s: i for i, s in enumerate(seeds)}
    rows.sort(key=lambda r: (r["threshold"], method_pos[r["method"]], seed_pos[r["seed"]]))

    summary = []
    for p in sorted(set(thresholds)):
        for m in methods:
            cell = [r for r in rows if r["threshold"] == p and r["method"] == m]
            entry = {"threshold": p, "method": m, "n_seeds": len(cell)}
            for key in SUMMARY_METRICS:
                vals = np.array([r[key] for r in cell])
                entry[f"{key}_mean"] = float(vals.mean())
                entry[f"{key}_sd"] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
            summary.append(entry)

    if write:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_rows(out / "bench.csv", rows, BENCH_FIELDS)
        _write_rows(out / "bench_summary.csv", summary, list(summary[0]) if summary else [])
    return rows, summary


def _write_rows(path: Path, rows: list[dict], header: list[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) and math.isfinite(v) else v) for k, v in r.items()})
