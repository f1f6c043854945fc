"""Command-line entry point.

Subcommands: ingest, filter, impute, synth, select, evaluate, run, bench.
Each accepts ``--config FILE`` (``key = value`` lines) plus flag overrides,
and the shared ``--seed``, ``--out-dir`` and ``--dry-run`` flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import aggregation, data_model, imputation, pipeline, synthetic
from .pipeline import ConfigError, StageError, dumps

log = logging.getLogger("usefs")


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global")
    g.add_argument("--config", help="key = value config file")
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--out-dir", dest="out_dir", help="output directory")
    g.add_argument("--dry-run", action="store_true", help="print the resolved config and exit")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _data_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--data", help="input CSV (omit to use the synthetic generator)")
    g.add_argument("--schema", help="schema file, one 'name,kind' line per column")
    g.add_argument("--outcome-column", dest="outcome_column")
    g.add_argument("--positive-label", dest="positive_label")


def _filter_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--percent", type=float, help="completion threshold in percent (e.g. 70)")


def _impute_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", dest="imputation", choices=["mean", "knn"])
    p.add_argument("--k", dest="knn_k", type=int, help="neighbours for knn imputation")


def _ensemble_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("ensemble")
    g.add_argument("--imputation", choices=["mean", "knn"])
    g.add_argument("--knn-k", dest="knn_k", type=int)
    g.add_argument("--n-ways", dest="n_ways", type=int)
    g.add_argument("--cv-folds", dest="cv_folds", type=int)
    g.add_argument("--max-depth", dest="max_depth", type=int)
    g.add_argument("--n-jobs", dest="n_jobs", type=int)


def _select_args(p: argparse.ArgumentParser, method_flag: str = "--method") -> None:
    g = p.add_argument_group("aggregation")
    g.add_argument(method_flag, dest="aggregation", choices=list(aggregation.METHODS))
    g.add_argument("--k", dest="n_features", type=int, help="number of features to select")
    g.add_argument("--alpha", type=float, help="alpha for the chosen MAA/EAA method")
    g.add_argument("--beta", type=float, help="beta for the chosen MAA/EAA method")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="usefs",
        description="Undersampling ensemble feature selection for imbalanced data with missing values.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="load a CSV and report completion stats")
    _data_args(p)

    p = sub.add_parser("filter", parents=[common], help="drop sparse columns, then sparse rows")
    _data_args(p)
    _filter_args(p)

    p = sub.add_parser("impute", parents=[common], help="fill missing cells")
    _data_args(p)
    _filter_args(p)
    _impute_args(p)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    p.add_argument("--n-pos", dest="n_pos", type=int)
    p.add_argument("--n-neg", dest="n_neg", type=int)
    p.add_argument("--n-informative", dest="n_informative", type=int)
    p.add_argument("--n-noise-numerical", dest="n_noise_numerical", type=int)
    p.add_argument("--n-noise-categorical", dest="n_noise_categorical", type=int)
    p.add_argument("--effect-size", dest="effect_size", type=float)
    p.add_argument("--missing-ramp", dest="missing_profile", type=_floats, help="min,max")
    p.add_argument("--missing-mode", dest="missing_mode", choices=["mcar", "informative"])
    p.add_argument("--label-noise", dest="label_noise", type=float)

    for name, help_ in (
        ("select", "select features with one aggregation method"),
        ("evaluate", "evaluate a feature set with the voting ensemble"),
        ("run", "select then evaluate, writing all artifacts"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        _data_args(p)
        _filter_args(p)
        _ensemble_args(p)
        _select_args(p)
        if name == "evaluate":
            p.add_argument("--selected", help="selected.json from 'select'; omit to select first")

    p = sub.add_parser("bench", parents=[common], help="threshold x method x seed sweep")
    _data_args(p)
    _ensemble_args(p)
    p.add_argument("--k", dest="n_features", type=int)
    p.add_argument("--thresholds", type=_floats, default=[0.5, 0.6, 0.7, 0.8])
    p.add_argument("--methods", type=lambda s: [m.strip() for m in s.split(",")], default=["ofa", "caa", "maa", "eaa"])
    p.add_argument("--seeds", type=_ints, default=[0])
    return parser


_SYNTH_FLAGS = (
    "n_pos", "n_neg", "n_informative", "n_noise_numerical", "n_noise_categorical",
    "effect_size", "missing_profile", "missing_mode", "label_noise",
)
_PASSTHROUGH = (
    "data", "schema", "outcome_column", "positive_label", "imputation", "knn_k",
    "n_ways", "cv_folds", "max_depth", "n_jobs", "aggregation", "n_features", "out_dir",
)


def resolve(args: argparse.Namespace) -> pipeline.PipelineConfig:
    settings = pipeline.read_config_file(args.config) if args.config else {}
    for key in _PASSTHROUGH:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if args.seed is not None:
        settings["seed"] = args.seed
    if getattr(args, "percent", None) is not None:
        settings["completion_threshold"] = args.percent / 100.0
    synth = {k: getattr(args, k) for k in _SYNTH_FLAGS if getattr(args, k, None) is not None}
    if synth:
        if "missing_profile" in synth:
            synth["missing_profile"] = tuple(synth["missing_profile"])
        settings["synth"] = {**settings.get("synth", {}), **synth}
    method = settings.get("aggregation", "caa")
    for param in ("alpha", "beta"):
        value = getattr(args, param, None)
        if value is None:
            continue
        if method not in ("maa", "eaa"):
            raise ConfigError(f"--{param} only applies to maa or eaa, not {method}")
        settings[f"{method}_{param}"] = value
    return pipeline.build_config(settings)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def _stats_payload(d: data_model.Dataset) -> dict:
    stats = data_model.completion_stats(d)
    return {
        "n_rows": d.n_rows,
        "n_features": d.n_features,
        "n_positive": int(d.outcome.sum()),
        "columns": [{"name": c.name, "kind": c.kind.value} for c in d.columns],
        "missing_rate": dict(zip(d.feature_names, map(float, stats.per_feature_missing_rate))),
    }


def _write_table(out: Path, stem: str, d: data_model.Dataset, config: pipeline.PipelineConfig) -> None:
    outcome = config.outcome_column or "outcome"
    out.mkdir(parents=True, exist_ok=True)
    data_model.write_csv(out / f"{stem}.csv", d, outcome)
    data_model.write_schema(out / f"{stem}.schema", d, outcome)


def _cmd_ingest(config, args, out: Path) -> None:
    d = pipeline.load_dataset(config)
    _write_table(out, "ingested", d, config)
    _write(out / "ingest.json", dumps(_stats_payload(d)))


def _cmd_filter(config, args, out: Path) -> None:
    d = pipeline.load_dataset(config)
    with pipeline._stage("filter"):
        f = data_model.filter_by_completion(d, config.completion_threshold)
    _write_table(out, "filtered", f, config)
    _write(out / "filtered.json", dumps(_stats_payload(f)))


def _cmd_impute(config, args, out: Path) -> None:
    d = pipeline.load_dataset(config)
    with pipeline._stage("filter"):
        f = data_model.filter_by_completion(d, config.completion_threshold)
    with pipeline._stage("impute"):
        full = imputation.impute(f, config.imputation_method())
    _write_table(out, "imputed", full, config)
    sidecar = {"method": config.imputation, "fill_counts": imputation.fill_counts(f, full)}
    if config.imputation == "knn":
        sidecar["k"] = config.knn_k
    _write(out / "imputed.json", dumps(sidecar))


def _cmd_synth(config, args, out: Path) -> None:
    paths = synthetic.write(config.synthetic_spec(), out)
    for p in paths.values():
        log.info("wrote %s", p)


def _selection(config):
    d = pipeline.load_dataset(config)
    prep = pipeline.prepare(d, config)
    cfg = config.ensemble
    if config.method in aggregation.RANK_METHODS:
        cfg = replace(cfg, compute_ranks=True)
    models = pipeline.fit_selection_ways(prep, cfg)
    scores = pipeline.aggregate(prep, models, config, config.method)
    return prep, pipeline.selection_payload(prep, scores)


def _cmd_select(config, args, out: Path) -> None:
    _, selection = _selection(config)
    _write(out / "selected.json", dumps(selection))


def _cmd_evaluate(config, args, out: Path) -> None:
    if args.selected:
        payload = json.loads(Path(args.selected).read_text())
        d = pipeline.load_dataset(config)
        prep = pipeline.prepare(d, config)
        names = prep.imputed.feature_names
        if "selected_names" in payload:
            missing = [n for n in payload["selected_names"] if n not in names]
            if missing:
                raise ConfigError(f"selected features not present after filtering: {missing}")
            selected = [names.index(n) for n in payload["selected_names"]]
        else:
            selected = payload["selected"]
    else:
        prep, payload = _selection(config)
        selected = payload["selected"]
    report = pipeline.evaluate(prep, selected, config.ensemble)
    _write(out / "report.json", dumps(report.to_dict()))


def _cmd_run(config, args, out: Path) -> None:
    result = pipeline.run_pipeline(config)
    sys.stdout.write(result["summary"])


def _cmd_bench(config, args, out: Path) -> None:
    _, summary = pipeline.run_bench(config, args.thresholds, args.methods, args.seeds)
    for row in summary:
        print(
            f"p={row['threshold']:.2f} {row['method']:>4}  auc={row['auc_mean']:.4f}±{row['auc_sd']:.4f}"
            f"  acc={row['accuracy_mean']:.4f}  miss={row['mean_missing_rate_mean']:.4f}"
            f"  dE={row['mean_entropy_delta_mean']:.4f}"
        )


COMMANDS = {
    "ingest": _cmd_ingest,
    "filter": _cmd_filter,
    "impute": _cmd_impute,
    "synth": _cmd_synth,
    "select": _cmd_select,
    "evaluate": _cmd_evaluate,
    "run": _cmd_run,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = resolve(args)
    except ConfigError as err:
        print(f"usefs: config error: {err}", file=sys.stderr)
        return 2
    if args.dry_run:
        resolved = {"command": args.command, "config": config.to_dict()}
        if args.command == "bench":
            resolved.update(thresholds=args.thresholds, methods=args.methods, seeds=args.seeds)
        sys.stdout.write(dumps(resolved))
        return 0
    try:
        COMMANDS[args.command](config, args, Path(config.out_dir))
    except ConfigError as err:
        print(f"usefs: config error: {err}", file=sys.stderr)
        return 2
    except StageError as err:
        print(f"usefs: {args.command} failed {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
