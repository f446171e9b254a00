"""Uniform sphere directions and the symmetric two-point gradient estimator.

g = (d / 2 mu) * (F(x + mu v; xi) - F(x - mu v; xi)) * v, with the token xi
drawn before the direction v (fixed order, one estimate = exactly two oracle
evaluations). For an L-Lipschitz objective ||g|| <= L d; this is asserted on
every estimate rather than clipped, since a violation means a bug.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracle import SampleToken, StochasticObjective, two_point


@dataclass(frozen=True)
class GradientEstimate:
    g: np.ndarray
    finite_diff: float  # raw F(x+mu v) - F(x-mu v), kept for diagnostics
    direction: np.ndarray
    token: SampleToken


def sample_sphere(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the unit sphere: normalize a standard Gaussian,
    redrawing the (numerically possible) all-zero sample."""
    if d < 1:
        raise ValueError("dimension must be positive")
    while True:
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
        if norm > 0.0:
            return v / norm


def estimate_gradient(
    obj: StochasticObjective,
    x: np.ndarray,
    mu: float,
    rng: np.random.Generator,
    direction: np.ndarray | None = None,
) -> GradientEstimate:
    """Two-point estimate at x with smoothing radius mu.

    Draws the oracle token first and the direction second from `rng`;
    passing `direction` skips the direction draw (tests only).
    """
    if mu <= 0:
        raise ValueError("smoothing radius mu must be positive")
    token = obj.sample(rng)
    v = sample_sphere(obj.d, rng) if direction is None else np.asarray(direction, dtype=float)
    f_plus, f_minus = two_point(obj, x, mu, v, token)
    diff = f_plus - f_minus
    g = (obj.d / (2.0 * mu)) * diff * v
    lip = getattr(obj, "lipschitz_bound", None)
    if lip is not None:
        assert np.linalg.norm(g) <= lip * obj.d + 1e-6, (
            f"estimate norm {np.linalg.norm(g)} exceeds L*d = {lip * obj.d}"
        )
    return GradientEstimate(g=g, finite_diff=diff, direction=v, token=token)
