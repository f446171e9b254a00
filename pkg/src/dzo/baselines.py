"""Distributed subgradient-free baseline (DSF) in tuned and default variants.

Same simulator skeleton as the adaptive method and the same same-sample
two-point oracle contract, but preset diminishing schedules

    eta_t = eta0 / (t+1)^alpha      (default alpha = 1/2)
    mu_t  = mu0  / (t+1)^beta       (default beta  = 1)

and a single gossip round per iteration (there is no radius consensus).
Estimates are formed at the pre-mix iterate and the step is applied to the
mixed one, mirroring the adaptive driver, so runs are directly comparable
per oracle call. DSF-D is the default config (eta0 = mu0 = 1); DSF-T picks
the grid config minimizing the final network-average objective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dpoem import FeasibleBall, _validate_setup, project_ball
from .estimator import estimate_gradient
from .metrics import (
    RunTrace,
    TraceRow,
    WeightedOutputAccumulator,
    consensus_error,
    make_trace_row,
)
from .network import MixingMatrix, mix
from .oracle import StochasticObjective, full_objective
from .seeding import STREAM_AGENT, substream


@dataclass(frozen=True)
class DsfConfig:
    eta0: float = 1.0
    mu0: float = 1.0
    alpha: float = 0.5
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.eta0 <= 0 or self.mu0 <= 0:
            raise ValueError("eta0 and mu0 must be positive")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("stepsize exponent alpha must lie in (0, 1]")
        if self.beta <= 0:
            raise ValueError("smoothing exponent beta must be positive")

    def eta(self, t: int) -> float:
        return self.eta0 / (t + 1.0) ** self.alpha

    def mu(self, t: int) -> float:
        return self.mu0 / (t + 1.0) ** self.beta


DEFAULT_GRID: tuple[DsfConfig, ...] = tuple(
    DsfConfig(eta0=e, mu0=m)
    for e in (0.01, 0.1, 1.0, 10.0)
    for m in (1e-3, 1e-2, 1e-1, 1.0)
)


def run_dsf(
    objs: Sequence[StochasticObjective],
    W: MixingMatrix,
    ball: FeasibleBall,
    x0: np.ndarray,
    cfg: DsfConfig,
    T: int,
    seed: int,
    metric_stride: int = 10,
    fingerprint: str = "",
    algorithm: str = "dsf",
) -> RunTrace:
    n, d = _validate_setup(objs, W, ball, x0, T, seed, metric_stride)
    x0 = np.asarray(x0, dtype=float)
    X = np.tile(x0, (n, 1))
    rngs = [substream(seed, STREAM_AGENT, i) for i in range(n)]

    hist_mu = np.empty(T)
    hist_eta = np.empty(T)
    hist_gnorm = np.empty((T, n))
    hist_xbar = np.empty((T, d))
    hist_consensus = np.empty(T)
    acc = WeightedOutputAccumulator(d)
    rows: list[TraceRow] = []

    g = np.empty((n, d))
    for t in range(T):
        xbar = X.mean(axis=0)
        E_t = consensus_error(X)
        mu_t = cfg.mu(t)
        eta_t = cfg.eta(t)
        for i in range(n):
            est = estimate_gradient(objs[i], X[i], mu_t, rngs[i])
            g[i] = est.g
            hist_gnorm[t, i] = np.linalg.norm(est.g)
        Z = mix(W, X)
        X = np.stack([project_ball(Z[i] - eta_t * g[i], ball) for i in range(n)])

        hist_mu[t] = mu_t
        hist_eta[t] = eta_t
        hist_xbar[t] = xbar
        hist_consensus[t] = E_t
        acc.update(1.0, xbar)

        if t % metric_stride == 0 or t == T - 1:
            rows.append(
                make_trace_row(
                    objs,
                    t=t,
                    oracle_calls_total=2 * n * (t + 1),
                    comm_rounds_total=t + 1,
                    xbar=xbar,
                    xtilde=acc.weighted_average(),
                    consensus=E_t,
                    rbar_mean=math.nan,
                    G_max=math.nan,
                    eta_mean=eta_t,
                    mu_mean=mu_t,
                )
            )

    return RunTrace(
        algorithm=algorithm,
        n=n,
        d=d,
        T=T,
        seed=seed,
        fingerprint=fingerprint,
        ball_radius=ball.radius,
        radius_floor=None,
        comm_rounds_per_iter=1,
        xbar=hist_xbar,
        weights=np.ones(T),
        consensus=hist_consensus,
        mu=hist_mu,
        eta=hist_eta,
        g_norm=hist_gnorm,
        final_x=X.copy(),
        rows=rows,
    )


def tune_dsf(
    objs: Sequence[StochasticObjective],
    W: MixingMatrix,
    ball: FeasibleBall,
    x0: np.ndarray,
    grid: Sequence[DsfConfig],
    T: int,
    seed: int,
    metric_stride: int = 10,
) -> DsfConfig:
    """Run every grid config on the shared context and return the one with the
    lowest final network-average objective; ties break toward smaller eta0,
    then smaller mu0, then grid order."""
    if not grid:
        raise ValueError("tuning grid must be nonempty")
    best: tuple[float, float, float, int] | None = None
    best_cfg = grid[0]
    for k, cfg in enumerate(grid):
        trace = run_dsf(objs, W, ball, x0, cfg, T, seed, metric_stride=max(T, 1))
        final_f = full_objective(objs, trace.final_xbar())
        key = (final_f, cfg.eta0, cfg.mu0, k)
        if best is None or key < best:
            best = key
            best_cfg = cfg
    return best_cfg
