"""Balanced ways, selection, and voting evaluation on an imbalanced table.

Runs in well under a minute with 21 ways; raise N_WAYS to 91 for the full setup.
"""

import numpy as np

from usefs import aggregation, data_model, ensemble, imputation, synthetic

N_WAYS = 21
spec = synthetic.SyntheticSpec(n_pos=40, n_neg=360, n_informative=10, n_noise_numerical=60,
                               n_noise_categorical=10, missing_profile=(0.0, 0.5),
                               missing_mode="informative", seed=7)
d, truth = synthetic.generate(spec)
f = data_model.filter_by_completion(d, 0.5)
rates = data_model.completion_stats(f).per_feature_missing_rate
full = imputation.impute_mean(f)
deltas = aggregation.entropy_delta(f, full)

cfg = ensemble.EnsembleConfig(n_ways=N_WAYS, n_features=10, seed=7)
ways = ensemble.make_ways(full, cfg.n_ways, cfg.seed)
print(f"{len(ways)} ways of {ways[0].size} rows each ({int(full.outcome.sum())} positives)")

models = ensemble.fit_ways(full, ways, cfg)
print("way CV accuracy range", round(min(m.cv_accuracy for m in models), 3),
      "to", round(max(m.cv_accuracy for m in models), 3))

planted = {f.feature_names.index(d.columns[j].name) for j in truth.informative_features
           if d.columns[j].name in f.feature_names}
for method in ("ofa", "caa", "maa", "eaa"):
    sel = ensemble.aggregate_ways(models, method, cfg.n_features, rates, deltas).selected
    report = ensemble.evaluate(full, sel, cfg)
    print(f"{method}: AUC {report.auc_score_based:.3f}  planted hits {len(planted & set(sel))}/{len(sel)}"
          f"  missing {rates[sel].mean():.3f}  dE {deltas[sel].mean():.3f}")

# the caa features again, voted on by one tree instead of the whole ensemble
sel = ensemble.aggregate_ways(models, "caa", cfg.n_features).selected
one = ensemble.evaluate(full, sel, ensemble.with_ways(cfg, 1))
print(f"caa features, single way: AUC {one.auc_score_based:.3f}")
