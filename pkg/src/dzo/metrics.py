"""Observer-side diagnostics: network averages, consensus error, the
radius-weighted output iterate and its selection rule, and checkable
inequalities. Everything here reads simulator state with global access and
charges no communication.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import Dataset, dataset_fingerprint, max_feature_norm
from .oracle import HingeObjective, full_objective


def network_average(X: np.ndarray) -> np.ndarray:
    """Column-wise mean of the stacked iterates."""
    return np.asarray(X, dtype=float).mean(axis=0)


def consensus_error(X: np.ndarray) -> float:
    """Frobenius norm of the row-centered iterate matrix."""
    X = np.asarray(X, dtype=float)
    return float(np.linalg.norm(X - X.mean(axis=0)))


class WeightedOutputAccumulator:
    """Running sums R = sum w_k and S = sum w_k * xbar_k.

    For the adaptive method the weight is the round's mean mixed radius; the
    baseline uses unit weights (plain averaged output). The running weighted
    average S/R reproduces the batch definition to float accuracy.
    """

    def __init__(self, d: int):
        self.R = 0.0
        self.S = np.zeros(d)
        self.weight_history: list[float] = []
        self.R_history: list[float] = []

    def update(self, weight: float, xbar: np.ndarray) -> None:
        if weight <= 0:
            raise ValueError("weights must be positive")
        self.R += weight
        self.S += weight * xbar
        self.weight_history.append(weight)
        self.R_history.append(self.R)

    @property
    def t(self) -> int:
        return len(self.weight_history)

    def weighted_average(self) -> np.ndarray:
        if self.R <= 0:
            raise ValueError("no rounds accumulated")
        return self.S / self.R


def select_output(weights: Sequence[float], xbars: np.ndarray) -> tuple[int, np.ndarray]:
    """Pick tau in [1, T] maximizing R_t / w_{t-1} (R_t = sum of the first t
    weights; the denominator is the last weight included in R_t, which is the
    form the monotone-sequence bound certifies). Ties go to the smallest t.
    Returns (tau, S_tau / R_tau).
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("need at least one round of history")
    X = np.asarray(xbars, dtype=float)
    if X.shape[0] != w.size:
        raise ValueError("weights and xbar history lengths disagree")
    R = np.cumsum(w)
    ratios = R / w
    tau = int(np.argmax(ratios)) + 1  # argmax returns the first maximizer
    S = np.cumsum(w[:, None] * X, axis=0)
    return tau, S[tau - 1] / R[tau - 1]


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    margin: float
    lhs: float
    rhs: float
    tau: int


def poem_bound_check(weights: Sequence[float], d_x: float, r_eps: float) -> BoundCheck:
    """Check max_t R_t / w_{t-1} >= T / (e (1 + log(D_X / r_eps))).

    Holds for every run of the adaptive method (mean radius is nondecreasing
    and sandwiched in [r_eps, D_X]); hand-crafted non-monotone histories can
    fail it, which makes a negative control for the checker.
    """
    w = np.asarray(weights, dtype=float)
    T = w.size
    R = np.cumsum(w)
    ratios = R / w
    tau = int(np.argmax(ratios)) + 1
    lhs = float(ratios[tau - 1])
    rhs = T / (math.e * (1.0 + math.log(d_x / r_eps)))
    return BoundCheck(passed=lhs >= rhs, margin=lhs / rhs, lhs=lhs, rhs=rhs, tau=tau)


# --- run traces ---------------------------------------------------------------

TRACE_COLUMNS = [
    "t",
    "oracle_calls_total",
    "comm_rounds_total",
    "f_xbar",
    "f_xtilde",
    "consensus_error",
    "rbar_mean",
    "G_max",
    "eta_mean",
    "mu_mean",
]


@dataclass(frozen=True)
class TraceRow:
    t: int
    oracle_calls_total: int
    comm_rounds_total: int
    f_xbar: float
    f_xtilde: float
    consensus_error: float
    rbar_mean: float
    G_max: float
    eta_mean: float
    mu_mean: float

    def as_list(self) -> list:
        return [getattr(self, c) for c in TRACE_COLUMNS]


def make_trace_row(
    objs,
    *,
    t: int,
    oracle_calls_total: int,
    comm_rounds_total: int,
    xbar: np.ndarray,
    xtilde: np.ndarray,
    consensus: float,
    rbar_mean: float,
    G_max: float,
    eta_mean: float,
    mu_mean: float,
) -> TraceRow:
    """Evaluate the exact objective at xbar and xtilde and assemble one row."""
    return TraceRow(
        t=t,
        oracle_calls_total=oracle_calls_total,
        comm_rounds_total=comm_rounds_total,
        f_xbar=full_objective(objs, xbar),
        f_xtilde=full_objective(objs, xtilde),
        consensus_error=consensus,
        rbar_mean=rbar_mean,
        G_max=G_max,
        eta_mean=eta_mean,
        mu_mean=mu_mean,
    )


@dataclass(frozen=True)
class RoundRecord:
    """Per-round view: one row of the trace arrays."""

    t: int
    r_hat: np.ndarray | None
    r_bar: np.ndarray | None
    mu: np.ndarray
    g_norm: np.ndarray
    eta: np.ndarray
    G: np.ndarray | None
    xbar: np.ndarray
    rbar_mean: float
    consensus_error: float
    oracle_calls_total: int
    comm_rounds_total: int


@dataclass
class RunTrace:
    """Everything recorded from one T-round run.

    Aggregates (xbar, weights, consensus) are kept for every round so the
    weighted output and its selection rule can be evaluated exactly; CSV rows
    are sampled at the metric stride (plus the final round).
    """

    algorithm: str
    n: int
    d: int
    T: int
    seed: int
    fingerprint: str
    ball_radius: float
    radius_floor: float | None
    comm_rounds_per_iter: int
    xbar: np.ndarray            # (T, d) pre-update network averages
    weights: np.ndarray         # (T,) output weights (mean mixed radius / ones)
    consensus: np.ndarray       # (T,)
    mu: np.ndarray              # (T, n) or (T,) for the baseline schedules
    eta: np.ndarray             # (T, n) or (T,)
    g_norm: np.ndarray          # (T, n)
    final_x: np.ndarray         # (n, d) output iterates
    rows: list[TraceRow] = field(default_factory=list)
    r_hat: np.ndarray | None = None   # (T, n)
    r_bar: np.ndarray | None = None   # (T, n)
    G: np.ndarray | None = None       # (T, n)

    @property
    def oracle_calls_total(self) -> int:
        return 2 * self.n * self.T

    @property
    def comm_rounds_total(self) -> int:
        return self.comm_rounds_per_iter * self.T

    def final_xbar(self) -> np.ndarray:
        return network_average(self.final_x)

    def round(self, t: int) -> RoundRecord:
        per_agent = self.mu.ndim == 2
        return RoundRecord(
            t=t,
            r_hat=None if self.r_hat is None else self.r_hat[t],
            r_bar=None if self.r_bar is None else self.r_bar[t],
            mu=self.mu[t] if per_agent else np.full(self.n, self.mu[t]),
            g_norm=self.g_norm[t],
            eta=self.eta[t] if per_agent else np.full(self.n, self.eta[t]),
            G=None if self.G is None else self.G[t],
            xbar=self.xbar[t],
            rbar_mean=float(self.weights[t]),
            consensus_error=float(self.consensus[t]),
            oracle_calls_total=2 * self.n * (t + 1),
            comm_rounds_total=self.comm_rounds_per_iter * (t + 1),
        )

    def select_output(self) -> tuple[int, np.ndarray]:
        return select_output(self.weights, self.xbar)

    def bound_check(self) -> BoundCheck | None:
        if self.radius_floor is None:
            return None
        return poem_bound_check(self.weights, 2.0 * self.ball_radius, self.radius_floor)


def gap_vs_reference(trace: RunTrace, f_star: float) -> np.ndarray:
    """f(xtilde) - f_star over the recorded rows."""
    return np.array([row.f_xtilde for row in trace.rows]) - f_star


def write_trace_csv(trace: RunTrace, path: str | Path) -> None:
    """Write the sampled rows atomically with a fixed column order."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in trace.rows:
            writer.writerow(row.as_list())
    os.replace(tmp, path)


# --- reference solutions for dataset problems ---------------------------------

def reference_minimizer(
    ds: Dataset,
    radius: float,
    iters: int = 100_000,
    cache_dir: str | Path | None = None,
) -> tuple[np.ndarray, float]:
    """High-accuracy hinge reference: deterministic full-batch projected
    subgradient with iterate averaging, cached per dataset fingerprint.
    """
    key = None
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        key = cache_dir / f"ref_{dataset_fingerprint(ds)[:16]}_r{radius}_i{iters}.npz"
        if key.exists():
            payload = np.load(key)
            return payload["x"], float(payload["f"])

    obj = HingeObjective(ds.samples, ds.d)
    A, b = obj._A, obj._labels
    L = max(max_feature_norm(ds), 1e-12)
    m = len(ds)
    x = np.zeros(ds.d)
    avg = np.zeros(ds.d)
    for k in range(iters):
        active = (1.0 - b * (A @ x)) > 0.0
        grad = -(A.T @ (b * active)) / m
        x = x - (radius / (L * math.sqrt(k + 1.0))) * grad
        nrm = np.linalg.norm(x)
        if nrm > radius:
            x *= radius / nrm
        avg += (x - avg) / (k + 1.0)
    f_ref = obj.mean_value(avg)
    if key is not None:
        np.savez(key, x=avg, f=f_ref)
    return avg, f_ref
