"""Filtering sparse columns and rows, then filling the gaps two ways."""

import numpy as np

from usefs import data_model, imputation, synthetic
from usefs.aggregation import entropy_delta

# a small table where later columns lose more cells
spec = synthetic.SyntheticSpec(n_pos=20, n_neg=80, n_informative=3, n_noise_numerical=9,
                               n_noise_categorical=3, missing_profile=(0.0, 0.6), seed=3)
d, truth = synthetic.generate(spec)
stats = data_model.completion_stats(d)
print("shape", d.n_rows, "x", d.n_features)
print("missing rate per column", np.round(stats.per_feature_missing_rate, 2))

# keep columns (then rows) with at least 70% of cells present
f = data_model.filter_by_completion(d, 0.7)
print("after filtering", f.n_rows, "x", f.n_features, "kept", f.feature_names)

# column means (nearest category id for categorical columns)
mean_filled = imputation.impute_mean(f)

# similarity-weighted donors: the 5 rows most alike on co-present cells
knn_filled = imputation.impute_similarity(f, k=5)

print("cells filled", sum(imputation.fill_counts(f, mean_filled).values()))
diff = np.abs(mean_filled.values - knn_filled.values)
print("largest disagreement between the two fills", diff.max().round(3))

# how much each fill moved the per-column entropy, in bits
print("entropy change, mean fill", np.round(entropy_delta(f, mean_filled), 3))
print("entropy change, knn fill ", np.round(entropy_delta(f, knn_filled), 3))
