"""Six ways to merge per-way feature evidence into one selection."""

import numpy as np

from usefs import aggregation as ag

# five ways over four features
ranks = [[1, 2, 3, 4], [2, 1, 4, 3], [1, 3, 2, 4], [3, 1, 2, 4], [1, 2, 4, 3]]
aucs = [0.9, 0.6, 0.8, 0.55, 0.85]
sets = [{0, 1}, {1, 2}, {0, 2}, {1}, {0, 1, 3}]
accs = [0.85, 0.6, 0.8, 0.55, 0.8]

missing = np.array([0.4, 0.0, 0.1, 0.0])     # feature 0 was heavily imputed
delta_e = np.array([0.9, 0.05, 0.2, 0.0])    # and its distribution moved most

for name, scores in [
    ("cla", ag.cla(ranks, 2)),
    ("wma", ag.wma(ranks, aucs, 2)),
    ("ofa", ag.ofa(sets, 2, 4)),
    ("caa", ag.caa(sets, accs, 2, 4)),
    ("maa", ag.maa(sets, accs, missing, ag.MAA_DEFAULT, 2)),
    ("eaa", ag.eaa(sets, accs, delta_e, ag.EAA_DEFAULT, 2)),
]:
    print(f"{name}: scores {np.round(scores.per_feature_score, 3)} -> {scores.selected}")

# the penalty in isolation
for m in (0.0, 0.2, 0.5):
    print(f"accuracy 0.8 at missing rate {m}: weight {ag.maa_weight(0.8, m, ag.MAA_DEFAULT):.4f}")
