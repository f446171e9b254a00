"""Stochastic local objectives with a same-sample two-point query contract.

Every objective exposes `sample(rng) -> token` and `eval(x, token) -> float`;
evaluating two points with the same token uses identical randomness, which is
what lets the symmetric two-point estimator cancel the sampling noise. Exact
(noise-free) mean values back the trace metrics.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence, runtime_checkable

import numpy as np
from scipy import sparse

from .data import Sample

SampleToken = object


@runtime_checkable
class StochasticObjective(Protocol):
    d: int
    lipschitz_bound: float

    def sample(self, rng: np.random.Generator) -> SampleToken: ...

    def eval(self, x: np.ndarray, token: SampleToken) -> float: ...

    def mean_value(self, x: np.ndarray) -> float: ...


class HingeObjective:
    """Hinge loss max{0, 1 - b<a, x>} over one agent's shard.

    A token is a shard index, so querying two points with one token trivially
    reuses the same (a, b). `mean_value` is the exact shard average, computed
    with one sparse matvec.
    """

    def __init__(self, shard: Sequence[Sample], d: int):
        if not shard:
            raise ValueError("hinge objective needs a nonempty shard")
        self.d = d
        self._m = len(shard)
        rows = np.repeat(np.arange(self._m), [s.indices.size for s in shard])
        cols = np.concatenate([s.indices for s in shard]) if self._m else np.empty(0)
        vals = np.concatenate([s.values for s in shard])
        self._A = sparse.csr_matrix((vals, (rows, cols)), shape=(self._m, d))
        self._labels = np.array([s.label for s in shard], dtype=np.float64)
        # Row slices for fast single-sample dots.
        self._indptr = self._A.indptr
        self._indices = self._A.indices
        self._data = self._A.data
        sq = np.asarray(self._A.multiply(self._A).sum(axis=1)).ravel()
        self.lipschitz_bound = float(np.sqrt(sq.max()))

    def __len__(self) -> int:
        return self._m

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self._m))

    def eval(self, x: np.ndarray, token: int) -> float:
        lo, hi = self._indptr[token], self._indptr[token + 1]
        dot = float(self._data[lo:hi] @ x[self._indices[lo:hi]])
        return max(0.0, 1.0 - self._labels[token] * dot)

    def mean_value(self, x: np.ndarray) -> float:
        margins = 1.0 - self._labels * (self._A @ x)
        return float(np.maximum(margins, 0.0).mean())


@dataclass
class LinearObjective:
    """F(x; xi) = <c, x> + xi with bounded zero-mean uniform noise.

    The smoothed gradient equals c exactly, which makes this the unbiasedness
    oracle for the estimator; c = 0 with zero noise gives the F == 0 fixed
    point objective.
    """

    coef: np.ndarray
    noise_scale: float = 0.0
    d: int = field(init=False)
    lipschitz_bound: float = field(init=False)

    def __post_init__(self) -> None:
        self.coef = np.asarray(self.coef, dtype=float)
        self.d = self.coef.size
        self.lipschitz_bound = float(np.linalg.norm(self.coef))

    def sample(self, rng: np.random.Generator) -> float:
        if self.noise_scale == 0.0:
            return 0.0
        return float(rng.uniform(-self.noise_scale, self.noise_scale))

    def eval(self, x: np.ndarray, token: float) -> float:
        return float(self.coef @ x) + token

    def mean_value(self, x: np.ndarray) -> float:
        return float(self.coef @ x)


@dataclass
class DistanceObjective:
    """F(x; xi) = ||x - center|| + xi; 1-Lipschitz with minimum 0 at the center."""

    center: np.ndarray
    noise_scale: float = 0.0
    d: int = field(init=False)
    lipschitz_bound: float = field(init=False, default=1.0)

    def __post_init__(self) -> None:
        self.center = np.asarray(self.center, dtype=float)
        self.d = self.center.size
        self.lipschitz_bound = 1.0

    def sample(self, rng: np.random.Generator) -> float:
        if self.noise_scale == 0.0:
            return 0.0
        return float(rng.uniform(-self.noise_scale, self.noise_scale))

    def eval(self, x: np.ndarray, token: float) -> float:
        return float(np.linalg.norm(x - self.center)) + token

    def mean_value(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(x - self.center))


def two_point(
    obj: StochasticObjective,
    x: np.ndarray,
    mu: float,
    v: np.ndarray,
    token: SampleToken,
) -> tuple[float, float]:
    """Evaluate (F(x + mu v), F(x - mu v)) with the SAME token at both points.

    Query points may leave the feasible set; all built-in objectives are
    defined on the whole space.
    """
    if mu <= 0:
        raise ValueError("smoothing radius mu must be positive")
    nv = np.linalg.norm(v)
    if abs(nv - 1.0) > 1e-10:
        raise ValueError(f"direction must be a unit vector (norm {nv})")
    return obj.eval(x + mu * v, token), obj.eval(x - mu * v, token)


def full_objective(objs: Sequence[StochasticObjective], x: np.ndarray) -> float:
    """Exact network objective: the agent-average of exact local means."""
    d = objs[0].d
    for o in objs:
        if o.d != d:
            raise ValueError("objectives disagree on dimension")
    if x.shape != (d,):
        raise ValueError(f"point has shape {x.shape}, expected ({d},)")
    return float(np.mean([o.mean_value(x) for o in objs]))
