from __future__ import annotations

import numpy as np
import pytest

from dzo.data import parse_libsvm, partition_iid, synthetic_sparse_classification
from dzo.dpoem import FeasibleBall
from dzo.network import erdos_renyi, metropolis_weights
from dzo.oracle import DistanceObjective, HingeObjective

TINY_LIBSVM = """\
+1 1:2 3:-0.5
-1 2:1.5 3:1.0
+1 1:0.5
-1 1:-1 2:-1 3:-1
"""


@pytest.fixture(scope="session")
def tiny_dataset():
    return parse_libsvm(TINY_LIBSVM)


@pytest.fixture(scope="session")
def standin_dataset():
    """Mushrooms-shaped stand-in used when the real file is absent."""
    return synthetic_sparse_classification(112, 8124, 22, seed=7, flip_prob=0.05)


@pytest.fixture(scope="session")
def small_hinge_context():
    """20 agents on a small separable hinge problem with the benchmark graph."""
    ds = synthetic_sparse_classification(30, 400, 8, seed=11, flip_prob=0.02)
    part = partition_iid(ds, 20, seed=5)
    objs = [
        HingeObjective(tuple(ds.samples[k] for k in idxs), ds.d)
        for idxs in part.assignments
    ]
    W = metropolis_weights(erdos_renyi(20, 0.25, seed=5))
    return ds, objs, W, FeasibleBall(1.0), np.zeros(ds.d)


def make_distance_setup(n=20, d=8, seed=3, noise=0.1, center_norm=0.6):
    """Common-center distance objective; f* = 0 at the center."""
    center = np.zeros(d)
    center[0] = center_norm
    objs = [DistanceObjective(center, noise) for _ in range(n)]
    W = metropolis_weights(erdos_renyi(n, 0.25, seed))
    return objs, W, FeasibleBall(1.0), np.zeros(d), center
