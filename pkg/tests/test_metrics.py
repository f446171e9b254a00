from __future__ import annotations

import math

import numpy as np
import pytest

from dzo.data import parse_libsvm
from dzo.metrics import (
    WeightedOutputAccumulator,
    consensus_error,
    gap_vs_reference,
    network_average,
    poem_bound_check,
    reference_minimizer,
    select_output,
)
from dzo.network import erdos_renyi, metropolis_weights, mix


def test_network_average_cases():
    assert np.array_equal(network_average(np.tile([1.0, 2.0], (3, 1))), [1.0, 2.0])
    assert np.array_equal(network_average(np.array([[1.0, 0.0], [-1.0, 0.0]])), [0.0, 0.0])
    assert np.array_equal(network_average(np.array([[1.0, 1.0], [3.0, 5.0]])), [2.0, 3.0])


def test_consensus_error_cases():
    assert consensus_error(np.tile([2.0, -1.0], (4, 1))) == 0.0
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    assert consensus_error(X) == pytest.approx(math.sqrt(2.0))
    assert consensus_error(2 * X) == pytest.approx(2 * math.sqrt(2.0))


def test_select_output_constant_weights_picks_final():
    T, d = 7, 2
    xbars = np.arange(T * d, dtype=float).reshape(T, d)
    tau, x_out = select_output(np.ones(T), xbars)
    assert tau == T
    assert np.allclose(x_out, xbars.mean(axis=0))


def test_select_output_single_round():
    tau, x_out = select_output([0.5], np.array([[3.0, 4.0]]))
    assert tau == 1
    assert np.array_equal(x_out, [3.0, 4.0])


def test_select_output_hand_case():
    # weights (1,1,10): ratios R_t / w_{t-1} = (1, 2, 1.2) -> tau = 2.
    weights = [1.0, 1.0, 10.0]
    xbars = np.array([[1.0], [3.0], [100.0]])
    tau, x_out = select_output(weights, xbars)
    assert tau == 2
    assert np.allclose(x_out, [(1.0 * 1.0 + 1.0 * 3.0) / 2.0])


def test_select_output_tie_prefers_smallest_t():
    # weights (1, 1, 2): ratios (1, 2, 2) -- exact tie between t=2 and t=3.
    tau, x_out = select_output([1.0, 1.0, 2.0], np.array([[1.0], [2.0], [9.0]]))
    assert tau == 2
    assert np.allclose(x_out, [1.5])


def test_accumulator_matches_batch_definition():
    rng = np.random.default_rng(0)
    d = 3
    acc = WeightedOutputAccumulator(d)
    weights = []
    xbars = []
    for _ in range(200):
        w = float(rng.uniform(0.1, 2.0))
        x = rng.standard_normal(d)
        acc.update(w, x)
        weights.append(w)
        xbars.append(x)
        batch = np.average(np.array(xbars), axis=0, weights=np.array(weights))
        assert np.max(np.abs(acc.weighted_average() - batch)) < 1e-10


def test_accumulator_rejects_nonpositive_weight():
    acc = WeightedOutputAccumulator(2)
    with pytest.raises(ValueError):
        acc.update(0.0, np.zeros(2))


def test_bound_check_constant_history_passes():
    T = 50
    check = poem_bound_check(np.full(T, 0.1), d_x=2.0, r_eps=0.1)
    assert check.passed
    assert check.lhs == pytest.approx(T)
    assert check.rhs == pytest.approx(T / (math.e * (1 + math.log(20.0))))
    assert check.margin > 1


def test_bound_check_negative_control():
    # Non-monotone adversarial history: a huge final radius kills every ratio.
    w = np.full(40, 1e-6)
    w[-1] = 2.0
    w[:-1] = 1e-6
    check = poem_bound_check(w, d_x=2.0, r_eps=1e-6)
    assert not check.passed


def test_gap_vs_reference_series():
    class Row:
        def __init__(self, f):
            self.f_xtilde = f

    class FakeTrace:
        rows = [Row(1.0), Row(0.5), Row(0.25)]

    gaps = gap_vs_reference(FakeTrace(), 0.25)
    assert np.allclose(gaps, [0.75, 0.25, 0.0])


def test_pure_mixing_consensus_decay():
    # With zero stepsize the round is X <- W X: E_k <= sigma^k E_0.
    W = metropolis_weights(erdos_renyi(8, 0.4, 2))
    rng = np.random.default_rng(1)
    X = rng.standard_normal((8, 3))
    e0 = consensus_error(X)
    for k in range(1, 25):
        X = mix(W, X)
        assert consensus_error(X) <= W.sigma**k * e0 + 1e-9


def test_reference_minimizer_solves_separable_toy(tmp_path):
    # Two separable points: f = 0 at x = (1, 0) within the unit ball.
    ds = parse_libsvm("+1 1:2\n-1 1:-2\n")
    x_ref, f_ref = reference_minimizer(ds, radius=1.0, iters=3000, cache_dir=tmp_path)
    assert f_ref <= 1e-3
    assert x_ref[0] > 0.5
    # Cache hit returns identical values.
    x2, f2 = reference_minimizer(ds, radius=1.0, iters=3000, cache_dir=tmp_path)
    assert np.array_equal(x_ref, x2) and f_ref == f2
