"""Seed derivation shared by every stochastic stage."""

import numpy as np

_MASK = (1 << 64) - 1

# stream tags; never renumber, outputs depend on them
COUNTS = 1
TABLE_U = 2
TABLE_V = 3
SNAPSHOT = 4
ANOMALY = 5
ATTRS = 6
KMEANS = 7
BASELINE = 8


def rng(seed, *keys):
    """Return a Generator keyed on ``(seed, *keys)``.

    Identical keys give identical streams regardless of the order or thread
    in which generators are created.
    """
    entropy = [int(seed) & _MASK] + [int(k) & _MASK for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
