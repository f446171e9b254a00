"""Deterministic derivation of independent RNG streams from one master seed.

Every random draw in a run comes from a stream keyed by (master seed, role
tag, index), so results do not depend on the order in which components are
constructed or agents are iterated.
"""
from __future__ import annotations

import numpy as np

# Role tags keeping derived streams disjoint. Never reuse a tag for a new role.
STREAM_GRAPH = 101
STREAM_PARTITION = 102
STREAM_AGENT = 103
STREAM_DATA = 104


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Return the generator for (master_seed, *key).

    The same arguments always yield an identical stream; distinct keys yield
    statistically independent streams (numpy SeedSequence hashing).
    """
    if master_seed < 0:
        raise ValueError("master seed must be nonnegative")
    return np.random.default_rng([master_seed, *key])
