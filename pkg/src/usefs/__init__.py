"""Undersampling ensemble feature selection for imbalanced tables with missing values.

Typical flow::

    from usefs import synthetic, data_model, imputation, ensemble, aggregation

    d, truth = synthetic.generate(synthetic.SyntheticSpec(seed=1))
    d = data_model.filter_by_completion(d, 0.5)
    full = imputation.impute_mean(d)
    cfg = ensemble.EnsembleConfig(seed=1)
    models = ensemble.fit_ways(full, ensemble.make_ways(full, cfg.n_ways, cfg.seed), cfg)
    chosen = ensemble.aggregate_ways(models, "caa", cfg.n_features)
    report = ensemble.evaluate(full, chosen.selected, cfg)
"""

from . import aggregation, cart, data_model, ensemble, imputation, metrics, ranking, synthetic
from .aggregation import AggregateScores, VarianceWeightParams
from .data_model import ColumnKind, Dataset, filter_by_completion, ingest_csv
from .ensemble import EnsembleConfig, WayModel, evaluate, fit_ways, majority_vote, make_ways
from .metrics import EvalReport

__all__ = [
    "aggregation", "cart", "data_model", "ensemble", "imputation", "metrics", "ranking", "synthetic",
    "AggregateScores", "VarianceWeightParams", "ColumnKind", "Dataset", "filter_by_completion",
    "ingest_csv", "EnsembleConfig", "WayModel", "evaluate", "fit_ways", "majority_vote", "make_ways",
    "EvalReport",
]
__version__ = "0.1.0"
