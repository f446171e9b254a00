from __future__ import annotations

import numpy as np
import pytest

from dzo.network import (
    Graph,
    GraphConnectivityError,
    MixingMatrix,
    complete_graph,
    erdos_renyi,
    metropolis_weights,
    mix,
    path_graph,
    single_node_graph,
    spectral_gap,
    write_edge_list,
)

# Hand eigendecomposition for the 3-node path (degrees 1,2,1):
# W = [[2/3,1/3,0],[1/3,1/3,1/3],[0,1/3,2/3]], eigenvalues {1, 2/3, 0}.
PATH3_W = np.array(
    [
        [2 / 3, 1 / 3, 0.0],
        [1 / 3, 1 / 3, 1 / 3],
        [0.0, 1 / 3, 2 / 3],
    ]
)


def test_graph_rejects_self_loops_and_duplicates():
    with pytest.raises(ValueError):
        Graph(3, ((0, 0),))
    with pytest.raises(ValueError):
        Graph(3, ((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        Graph(2, ((0, 5),))


def test_erdos_renyi_p1_is_complete():
    g = erdos_renyi(2, 1.0, seed=42)
    assert g.edges == ((0, 1),)
    g5 = erdos_renyi(5, 1.0, seed=0)
    assert len(g5.edges) == 10


def test_erdos_renyi_deterministic():
    a = erdos_renyi(5, 0.3, seed=7)
    b = erdos_renyi(5, 0.3, seed=7)
    assert a.edges == b.edges


def test_erdos_renyi_connected_and_edge_count():
    # E[edges] = p * C(20,2) = 47.5; mean over seeds should be near it.
    counts = []
    for seed in range(40):
        g = erdos_renyi(20, 0.25, seed)
        assert g.is_connected()
        counts.append(len(g.edges))
    mean = np.mean(counts)
    # std of one draw = sqrt(190*.25*.75) ~ 5.97; mean of 40 has se ~ 0.94.
    assert abs(mean - 47.5) < 5 * 0.95


def test_erdos_renyi_validates_input():
    with pytest.raises(ValueError):
        erdos_renyi(1, 0.5, 0)
    with pytest.raises(ValueError):
        erdos_renyi(5, 0.0, 0)
    with pytest.raises(ValueError):
        erdos_renyi(5, 1.5, 0)


def test_erdos_renyi_gives_up_after_attempt_cap():
    # p small enough that 10 nodes virtually never connect in one attempt.
    with pytest.raises(GraphConnectivityError):
        erdos_renyi(10, 1e-6, seed=0, max_attempts=5)


def test_metropolis_two_node():
    W = metropolis_weights(erdos_renyi(2, 1.0, seed=1))
    assert np.allclose(W.W, np.full((2, 2), 0.5), atol=0)
    assert W.sigma == pytest.approx(0.0, abs=1e-12)


def test_metropolis_path3_matches_hand_values():
    W = metropolis_weights(path_graph(3))
    assert np.allclose(W.W, PATH3_W, atol=1e-15)
    assert W.sigma == pytest.approx(2 / 3, abs=1e-12)


def test_metropolis_complete_graph_is_averaging():
    W = metropolis_weights(complete_graph(3))
    assert np.allclose(W.W, np.full((3, 3), 1 / 3), atol=1e-15)
    assert W.sigma == pytest.approx(0.0, abs=1e-12)


def test_metropolis_rejects_disconnected():
    with pytest.raises(GraphConnectivityError):
        metropolis_weights(Graph(4, ((0, 1), (2, 3))))


def test_sigma_decreases_from_path_to_triangle():
    assert metropolis_weights(complete_graph(3)).sigma < metropolis_weights(path_graph(3)).sigma


def test_spectral_gap_of_averaging_matrix_is_zero():
    J = np.full((4, 4), 0.25)
    assert spectral_gap(J) == pytest.approx(0.0, abs=1e-12)


def test_single_node_graph_mixes_trivially():
    W = metropolis_weights(single_node_graph())
    assert W.W.shape == (1, 1) and W.W[0, 0] == 1.0 and W.sigma == 0.0


def test_mix_consensus_rows_are_fixed():
    W = metropolis_weights(path_graph(3))
    rows = np.tile([2.0, -1.0], (3, 1))
    assert np.allclose(mix(W, rows), rows, atol=1e-15)


def test_mix_exact_averaging_under_J():
    W = MixingMatrix(W=np.full((2, 2), 0.5))
    out = mix(W, np.array([[1.0, 0.0], [-1.0, 0.0]]))
    assert np.allclose(out, 0.0, atol=0)


def test_mix_path3_scalar_column():
    W = metropolis_weights(path_graph(3))
    out = mix(W, np.array([1.0, 0.0, 0.0]))
    assert np.allclose(out, [2 / 3, 1 / 3, 0.0], atol=1e-15)


def test_mix_rejects_dimension_mismatch():
    W = metropolis_weights(path_graph(3))
    with pytest.raises(ValueError):
        mix(W, np.zeros((4, 2)))


def test_mixing_matrix_invariants_random_graphs():
    rng = np.random.default_rng(0)
    for seed in range(25):
        n = int(rng.choice([5, 8, 13]))
        W = metropolis_weights(erdos_renyi(n, 0.4, seed))
        assert np.array_equal(W.W, W.W.T)
        assert np.all(W.W >= 0)
        ones = np.ones(n)
        assert np.max(np.abs(W.W.sum(axis=1) - ones)) <= 1e-12
        assert np.max(np.abs(W.W.sum(axis=0) - ones)) <= 1e-12
        assert W.sigma < 1.0


def test_contraction_property_random_states():
    rng = np.random.default_rng(42)
    for seed in range(10):
        n = 7
        W = metropolis_weights(erdos_renyi(n, 0.4, seed))
        for _ in range(5):
            X = rng.standard_normal((n, 4))
            Xc = X - X.mean(axis=0)
            mixed = mix(W, X)
            lhs = np.linalg.norm(mixed - mixed.mean(axis=0))
            assert lhs <= W.sigma * np.linalg.norm(Xc) + 1e-9


def test_mix_preserves_column_means():
    rng = np.random.default_rng(1)
    W = metropolis_weights(erdos_renyi(9, 0.5, 3))
    X = rng.standard_normal((9, 5)) * 100
    before = X.mean(axis=0)
    after = mix(W, X).mean(axis=0)
    assert np.all(np.abs(after - before) <= 1e-10 * np.maximum(np.abs(before), 1.0))


def test_mixing_matrix_constructor_rejects_bad_inputs():
    with pytest.raises(ValueError):
        MixingMatrix(W=np.array([[0.5, 0.5], [0.4, 0.6]]))  # asymmetric
    with pytest.raises(ValueError):
        MixingMatrix(W=np.array([[1.5, -0.5], [-0.5, 1.5]]))  # negative entries


def test_write_edge_list(tmp_path):
    g = Graph(4, ((2, 1), (0, 3)))
    out = tmp_path / "edges.txt"
    write_edge_list(g, out)
    assert out.read_text() == "0 3\n1 2\n"
