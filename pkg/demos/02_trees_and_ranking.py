"""A Gini tree grown from scratch, its importances, and an elimination ranking."""

import numpy as np

from usefs import cart
from usefs.metrics import auc
from usefs.ranking import rfe_rank

rng = np.random.default_rng(0)
n = 120
y = rng.integers(0, 2, n)
x = rng.normal(size=(n, 6))
x[:, 2] += 1.5 * y          # strong signal
x[:, 4] += 0.6 * y          # weak signal

tree = cart.fit(x, y, max_depth=4)
print("depth", cart.depth(tree.root))
print("training accuracy", (cart.predict(tree, x) == y).mean())

# importances sum to one; features the tree never splits on get zero
print("importances", np.round(cart.importances(tree), 3))

# leaf positive fractions give a ranking score
print("training AUC from leaf scores", round(auc(cart.predict_score(tree, x), y), 3))

# 1 = kept until the end
print("elimination ranks", rfe_rank(x, y, max_depth=4).tolist())
