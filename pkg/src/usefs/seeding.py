"""Counter-based sub-seed derivation.

Every stochastic stage draws from ``sub_rng(master_seed, *keys)`` where the
keys name the stage position (way index, fold index, attempt, ...). Nothing
reads ambient randomness, so a run is a pure function of its master seed.
"""

from __future__ import annotations

import numpy as np

# stage tags keep streams for different purposes apart
WAYS = 1
WAY_FOLDS = 2
OUTER_FOLDS = 3
OUTER_WAYS = 4
RANDOM_SELECTION = 5


def sub_rng(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)


def sub_seed(seed: int, *keys: int) -> int:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
