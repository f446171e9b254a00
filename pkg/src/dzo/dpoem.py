"""Round driver for the adaptive decentralized zeroth-order method.

One bulk-synchronous round per iteration t:

    r_hat_i = max(prev mixed radius, ||x_i - x_i0||)    # radius proxy
    r_bar   = W @ r_hat                                 # scalar gossip round
    mu_i    = r_bar_i * sqrt(d / (t+1))                 # smoothing radius
    g_i     = two-point estimate at x_i (token drawn before direction)
    G_i    += ||g_i||^2                                 # accumulator
    eta_i   = r_bar_i / sqrt(G_i)                       # adaptive stepsize
    z       = W @ x                                     # vector gossip round
    x_i     = project(z_i - eta_i * g_i)

All radius proxies are computed before the scalar mixing, every estimate uses
the pre-mix iterate, and the step is applied to the mixed iterate. Per agent
and round: two oracle evaluations, two communication rounds. No Lipschitz
constant, diameter, or horizon knowledge enters the schedule; the radius
floor r_eps only seeds it (r_bar_{-1} = r_eps, G_{-1} = r_eps^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .estimator import estimate_gradient
from .metrics import (
    RunTrace,
    TraceRow,
    WeightedOutputAccumulator,
    consensus_error,
    make_trace_row,
)
from .network import MixingMatrix, mix
from .oracle import StochasticObjective
from .seeding import STREAM_AGENT, substream


@dataclass(frozen=True)
class FeasibleBall:
    """Euclidean ball centered at the origin; the constraint set."""

    radius: float

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return float(np.linalg.norm(x)) <= self.radius + tol


def project_ball(y: np.ndarray, ball: FeasibleBall) -> np.ndarray:
    """Euclidean projection: rescale onto the sphere if outside."""
    nrm = float(np.linalg.norm(y))
    if nrm <= ball.radius:
        return y
    return (ball.radius / nrm) * y


@dataclass
class AgentState:
    """One agent's mutable state between rounds."""

    id: int
    x: np.ndarray
    x0: np.ndarray
    r_bar_prev: float
    G: float
    rng: np.random.Generator


def radius_proxy(state: AgentState) -> float:
    """max of the previous mixed radius and the distance traveled from the anchor."""
    return max(state.r_bar_prev, float(np.linalg.norm(state.x - state.x0)))


def smoothing_radius(r_bar: float, d: int, t: int) -> float:
    return r_bar * math.sqrt(d / (t + 1.0))


def stepsize(r_bar: float, G: float) -> float:
    return r_bar / math.sqrt(G)


def run_dpoem(
    objs: Sequence[StochasticObjective],
    W: MixingMatrix,
    ball: FeasibleBall,
    x0: np.ndarray,
    r_eps: float,
    T: int,
    seed: int,
    metric_stride: int = 10,
    fingerprint: str = "",
) -> RunTrace:
    """Run T rounds from common initialization x0 and return the full trace."""
    n, d = _validate_setup(objs, W, ball, x0, T, seed, metric_stride)
    if not 0.0 < r_eps <= ball.diameter:
        raise ValueError(f"r_eps must lie in (0, {ball.diameter}], got {r_eps}")

    x0 = np.asarray(x0, dtype=float)
    states = [
        AgentState(
            id=i,
            x=x0.copy(),
            x0=x0,
            r_bar_prev=r_eps,
            G=r_eps * r_eps,
            rng=substream(seed, STREAM_AGENT, i),
        )
        for i in range(n)
    ]

    hist_r_hat = np.empty((T, n))
    hist_r_bar = np.empty((T, n))
    hist_mu = np.empty((T, n))
    hist_eta = np.empty((T, n))
    hist_gnorm = np.empty((T, n))
    hist_G = np.empty((T, n))
    hist_xbar = np.empty((T, d))
    hist_consensus = np.empty(T)
    acc = WeightedOutputAccumulator(d)
    rows: list[TraceRow] = []

    g = np.empty((n, d))
    eta = np.empty(n)
    for t in range(T):
        X = np.stack([s.x for s in states])
        xbar = X.mean(axis=0)
        E_t = consensus_error(X)

        # Lines 4-6: radius proxies, then one scalar gossip round.
        r_hat = np.array([radius_proxy(s) for s in states])
        r_bar = mix(W, r_hat)

        # Lines 7-11: per-agent smoothing, estimation, accumulator, stepsize.
        for i, s in enumerate(states):
            mu_i = smoothing_radius(r_bar[i], d, t)
            est = estimate_gradient(objs[i], s.x, mu_i, s.rng)
            g[i] = est.g
            gn = float(np.linalg.norm(est.g))
            s.G += gn * gn
            eta[i] = stepsize(r_bar[i], s.G)
            hist_mu[t, i] = mu_i
            hist_gnorm[t, i] = gn
            hist_G[t, i] = s.G

        # Lines 13-14: one vector gossip round, then the projected step.
        Z = mix(W, X)
        steps = eta[:, None] * g
        for i, s in enumerate(states):
            s.x = project_ball(Z[i] - steps[i], ball)
            s.r_bar_prev = float(r_bar[i])

        # Contraction of the disagreement component (proof-backed invariant):
        # E_{t+1} <= sigma E_t + ||(I - J) steps||_F.
        X_next = np.stack([s.x for s in states])
        assert consensus_error(X_next) <= W.sigma * E_t + consensus_error(steps) + 1e-9
        assert r_bar.min() >= r_eps - 1e-9 and r_bar.max() <= ball.diameter + 1e-9

        hist_r_hat[t] = r_hat
        hist_r_bar[t] = r_bar
        hist_eta[t] = eta
        hist_xbar[t] = xbar
        hist_consensus[t] = E_t
        acc.update(float(r_bar.mean()), xbar)

        if t % metric_stride == 0 or t == T - 1:
            rows.append(
                make_trace_row(
                    objs,
                    t=t,
                    oracle_calls_total=2 * n * (t + 1),
                    comm_rounds_total=2 * (t + 1),
                    xbar=xbar,
                    xtilde=acc.weighted_average(),
                    consensus=E_t,
                    rbar_mean=float(r_bar.mean()),
                    G_max=float(hist_G[t].max()),
                    eta_mean=float(eta.mean()),
                    mu_mean=float(hist_mu[t].mean()),
                )
            )

    return RunTrace(
        algorithm="dpoem",
        n=n,
        d=d,
        T=T,
        seed=seed,
        fingerprint=fingerprint,
        ball_radius=ball.radius,
        radius_floor=r_eps,
        comm_rounds_per_iter=2,
        xbar=hist_xbar,
        weights=hist_r_bar.mean(axis=1),
        consensus=hist_consensus,
        mu=hist_mu,
        eta=hist_eta,
        g_norm=hist_gnorm,
        final_x=np.stack([s.x for s in states]),
        rows=rows,
        r_hat=hist_r_hat,
        r_bar=hist_r_bar,
        G=hist_G,
    )


def _validate_setup(
    objs: Sequence[StochasticObjective],
    W: MixingMatrix,
    ball: FeasibleBall,
    x0: np.ndarray,
    T: int,
    seed: int,
    metric_stride: int,
) -> tuple[int, int]:
    """Shared structural checks, rejected before round 0."""
    n = len(objs)
    if n == 0:
        raise ValueError("need at least one objective")
    if W.n != n:
        raise ValueError(f"mixing matrix is {W.n}x{W.n} but there are {n} agents")
    d = objs[0].d
    for o in objs:
        if o.d != d:
            raise ValueError("objectives disagree on dimension")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (d,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({d},)")
    if not ball.contains(x0):
        raise ValueError("x0 must lie in the feasible ball")
    if T < 1:
        raise ValueError("horizon T must be at least 1")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    if metric_stride < 1:
        raise ValueError("metric stride must be at least 1")
    return n, d
