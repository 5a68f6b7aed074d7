"""Shared helpers: independent oracles the implementation never touches."""

import numpy as np
import pytest

from graphdecon.filters import FilterSpec, coefficients
from graphdecon.generators import random_connected_graph
from graphdecon.graph import Graph, NormalizedOperator


def dense_polynomial_oracle(
    spec: FilterSpec, lap: NormalizedOperator, x: np.ndarray
) -> np.ndarray:
    """Explicitly build sum c_k L^k as a dense matrix and multiply."""
    coeffs = coefficients(spec)
    dense = lap.matrix.toarray()
    acc = np.zeros_like(dense)
    power = np.eye(dense.shape[0])
    for c in coeffs:
        acc += c * power
        power = power @ dense
    return acc @ x


def laplacian_eigens(lap: NormalizedOperator):
    return np.linalg.eigh(lap.matrix.toarray())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_graph(rng):
    g = random_connected_graph(rng, 7, 0.4)
    return g.with_features(rng.normal(size=(7, 3)))
