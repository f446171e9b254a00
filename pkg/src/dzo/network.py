"""Communication graphs, doubly stochastic mixing matrices, spectral quantities.

One multiplication by the mixing matrix W is one gossip round. W is built with
Metropolis-Hastings weights, so it is symmetric and doubly stochastic by
construction; its contraction factor sigma = ||W - J||_2 (J the rank-one
averaging matrix) is computed once and cached.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeding import STREAM_GRAPH, substream

Edge = tuple[int, int]


class GraphConnectivityError(RuntimeError):
    """Raised when a connected graph cannot be produced."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes 0..n-1."""

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)

    @property
    def adjacency(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        adj = self.adjacency
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n


def erdos_renyi(n: int, p: float, seed: int, max_attempts: int = 1000) -> Graph:
    """Sample a connected G(n, p) graph, deterministic in (n, p, seed).

    Each unordered pair is included independently with probability p. A
    disconnected sample is redrawn from the next sub-seed; after
    `max_attempts` failures a GraphConnectivityError is raised.
    """
    if n < 2:
        raise ValueError("erdos_renyi requires n >= 2")
    if not 0.0 < p <= 1.0:
        raise ValueError("edge probability must lie in (0, 1]")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for attempt in range(max_attempts):
        rng = substream(seed, STREAM_GRAPH, attempt)
        draws = rng.random(len(pairs))
        edges = tuple(pair for pair, u in zip(pairs, draws) if u < p)
        g = Graph(n, edges)
        if g.is_connected():
            return g
    raise GraphConnectivityError(
        f"graph never connected after {max_attempts} attempts (n={n}, p={p}, seed={seed})"
    )


def path_graph(n: int) -> Graph:
    """Path 0-1-...-(n-1); the slowest-mixing connected graph used in tests."""
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def single_node_graph() -> Graph:
    """Degenerate one-agent network (W = [[1]])."""
    return Graph(1, ())


@dataclass(frozen=True)
class MixingMatrix:
    """Symmetric doubly stochastic weights supported on a graph's edges."""

    W: np.ndarray
    sigma: float = field(default=-1.0)

    def __post_init__(self) -> None:
        W = self.W
        n = W.shape[0]
        if W.shape != (n, n):
            raise ValueError("mixing matrix must be square")
        if not np.array_equal(W, W.T):
            raise ValueError("mixing matrix must be exactly symmetric")
        if np.any(W < 0):
            raise ValueError("mixing matrix entries must be nonnegative")
        ones = np.ones(n)
        if np.max(np.abs(W.sum(axis=1) - ones)) > 1e-12:
            raise ValueError("row sums must equal 1 within 1e-12")
        if np.max(np.abs(W.sum(axis=0) - ones)) > 1e-12:
            raise ValueError("column sums must equal 1 within 1e-12")
        if self.sigma < 0:
            object.__setattr__(self, "sigma", spectral_gap(W))

    @property
    def n(self) -> int:
        return self.W.shape[0]


def metropolis_weights(g: Graph) -> MixingMatrix:
    """Metropolis-Hastings weights: w_ij = 1 / (1 + max(deg_i, deg_j)).

    Diagonal entries absorb the leftover row mass. Requires a connected
    graph (a disconnected one has sigma = 1 and never contracts).
    """
    if not g.is_connected():
        raise GraphConnectivityError("metropolis_weights requires a connected graph")
    deg = g.degrees()
    W = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w = 1.0 / (1.0 + max(deg[i], deg[j]))
        W[i, j] = w
        W[j, i] = w
    for i in range(g.n):
        W[i, i] = 1.0 - (W[i].sum() - W[i, i])
    return MixingMatrix(W=W)


def spectral_gap(W: np.ndarray) -> float:
    """||W - J||_2 for symmetric doubly stochastic W: the contraction factor
    of the disagreement component per gossip round."""
    n = W.shape[0]
    J = np.full((n, n), 1.0 / n)
    return float(np.max(np.abs(np.linalg.eigvalsh(W - J))))


def mix(W: MixingMatrix, rows: np.ndarray) -> np.ndarray:
    """One gossip round: W @ rows. Accepts (n,) or (n, d) arrays; preserves
    column means exactly up to float summation order."""
    rows = np.asarray(rows, dtype=float)
    if rows.shape[0] != W.n:
        raise ValueError(f"expected {W.n} rows, got {rows.shape[0]}")
    return W.W @ rows


def write_edge_list(g: Graph, path) -> None:
    """Debugging export: one 'i j' pair per line, sorted."""
    lines = [f"{min(i, j)} {max(i, j)}\n" for i, j in g.edges]
    with open(path, "w") as fh:
        fh.writelines(sorted(lines))
