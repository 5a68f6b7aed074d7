"""Seeded synthetic graphs, signals, and rating data.

These stand in for the large external benchmarks: a grid road-network
analog for signal reconstruction, small structure-classification corpora
for the embedding task, and low-rank ratings over a community social graph
for rating recovery.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .graph import Graph, build_sym_laplacian
from .io.datasets import DatasetBundle, RatingData, degree_one_hot


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    n_comp, _ = connected_components(g.adj, directed=False)
    return n_comp == 1


def grid_graph(rows: int, cols: int) -> Graph:
    """4-neighbor lattice, the stand-in for a road network."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            idx = r * cols + c
            if c + 1 < cols:
                edges.append((idx, idx + 1))
            if r + 1 < rows:
                edges.append((idx, idx + cols))
    return Graph.from_edges(rows * cols, edges)


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    mask = rng.random((n, n)) < p
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if mask[i, j]]
    return Graph.from_edges(n, edges)


def random_connected_graph(
    rng: np.random.Generator, n: int, p: float = 0.3, max_tries: int = 50
) -> Graph:
    """Erdos-Renyi draws until connected (spanning-path fallback)."""
    for _ in range(max_tries):
        g = random_graph(rng, n, p)
        if is_connected(g):
            return g
    base = [(i, i + 1) for i in range(n - 1)]
    extra = [(i, j) for i in range(n) for j in range(i + 2, n) if rng.random() < p]
    return Graph.from_edges(n, base + extra)


def mixed_frequency_signal(
    rng: np.random.Generator,
    g: Graph,
    smooth_components: int = 6,
    spikes: int = 8,
    spike_amplitude: float = 2.0,
) -> np.ndarray:
    """Signal with both characters: a low-eigenvector mixture plus spikes.

    The smooth part mixes the lowest nontrivial Laplacian eigenvectors and
    is normalized to unit standard deviation; spikes then add localized
    high-frequency energy at random nodes.
    """
    lap = build_sym_laplacian(g).matrix.toarray()
    _, vecs = np.linalg.eigh(lap)
    k = min(smooth_components, g.n - 1)
    weights = rng.normal(size=k) / np.arange(1, k + 1)
    smooth = vecs[:, 1: k + 1] @ weights
    std = smooth.std()
    if std > 0:
        smooth = smooth / std
    signal = smooth.copy()
    spike_nodes = rng.choice(g.n, size=min(spikes, g.n), replace=False)
    signal[spike_nodes] += spike_amplitude * rng.choice([-1.0, 1.0], size=len(spike_nodes))
    return signal


def structure_pair_dataset(
    seed: int,
    n_per_class: int = 100,
    min_nodes: int = 6,
    max_nodes: int = 12,
    kinds: tuple[str, str] = ("cycle", "star"),
    degree_cap: int = 16,
) -> DatasetBundle:
    """Two-class corpus of small structured graphs with degree features.

    Supported kinds: cycle, star, path, dense (ER p=0.45), sparse
    (ER p=0.2, connected).
    """
    rng = np.random.default_rng(seed)

    def make(kind: str, n: int) -> Graph:
        if kind == "cycle":
            return cycle_graph(n)
        if kind == "star":
            return star_graph(n)
        if kind == "path":
            return path_graph(n)
        if kind == "dense":
            return random_connected_graph(rng, n, 0.45)
        if kind == "sparse":
            return random_connected_graph(rng, n, 0.2)
        raise ValueError(f"unknown graph kind {kind!r}")

    graphs, labels = [], []
    for label, kind in enumerate(kinds):
        for _ in range(n_per_class):
            n = int(rng.integers(min_nodes, max_nodes + 1))
            g = make(kind, n)
            graphs.append(g.with_features(degree_one_hot(g, cap=degree_cap)))
            labels.append(label)
    order = rng.permutation(len(graphs))
    graphs = [graphs[i] for i in order]
    labels = np.array(labels)[order]
    return DatasetBundle(
        name=f"{kinds[0]}_vs_{kinds[1]}", graphs=tuple(graphs), labels=labels
    )


def synthetic_ratings(
    seed: int,
    n_users: int = 60,
    n_items: int = 40,
    train_density: float = 0.25,
    test_density: float = 0.10,
    rating_range: tuple[float, float] = (1.0, 5.0),
) -> RatingData:
    """Rank-2 ratings with a two-community social graph aligned to taste.

    Users in the same community share a factor direction and are densely
    connected socially, so the social graph is informative about ratings.
    """
    rng = np.random.default_rng(seed)
    half = n_users // 2
    communities = np.array([0] * half + [1] * (n_users - half))
    user_factors = np.zeros((n_users, 2))
    user_factors[communities == 0, 0] = 1.0
    user_factors[communities == 1, 1] = 1.0
    user_factors += 0.15 * rng.normal(size=user_factors.shape)
    item_factors = rng.uniform(0.0, 1.0, size=(n_items, 2))

    scores = user_factors @ item_factors.T
    lo, hi = rating_range
    span = scores.max() - scores.min()
    ratings = lo + (hi - lo) * (scores - scores.min()) / (span if span > 0 else 1.0)

    cells = [(u, i) for u in range(n_users) for i in range(n_items)]
    picked = rng.permutation(len(cells))
    n_train = int(round(train_density * len(cells)))
    n_test = int(round(test_density * len(cells)))
    train_cells = [cells[k] for k in sorted(picked[:n_train])]
    test_cells = [cells[k] for k in sorted(picked[n_train: n_train + n_test])]
    train = np.array([[u, i, ratings[u, i]] for u, i in train_cells])
    test = np.array([[u, i, ratings[u, i]] for u, i in test_cells])

    edges = []
    for u in range(n_users):
        for v in range(u + 1, n_users):
            p = 0.25 if communities[u] == communities[v] else 0.02
            if rng.random() < p:
                edges.append((u, v))
    social = Graph.from_edges(n_users, edges)

    return RatingData(
        n_users=n_users,
        n_items=n_items,
        train=train,
        test=test,
        social=social,
        rating_range=rating_range,
    )
