"""Sparse graph representation and normalized propagation operators.

All spectral machinery in this package runs on the symmetric normalized
Laplacian of an undirected, unweighted graph.  This module owns the graph
container plus the three normalizations used elsewhere:

* symmetric Laplacian   I - D^{-1/2} A D^{-1/2}   (spectrum in [0, 2])
* symmetric adjacency   D^{-1/2} A D^{-1/2}       (its complement to I)
* renormalized adjacency  D~^{-1/2} (A+I) D~^{-1/2}  (self-loop trick)
* left-normalized adjacency  D^{-1} A

Isolated nodes get a zero D^{-1/2} entry, which leaves the Laplacian
diagonal at 1 and keeps the spectrum inside [0, 2].  Raw adjacency never
stores self-loops; the normalizations add them where needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp


class OperatorKind(Enum):
    SYM_LAPLACIAN = "sym_laplacian"
    SYM_ADJ = "sym_adj"
    RENORM_ADJ = "renorm_adj"
    LEFT_NORM_ADJ = "left_norm_adj"


@dataclass(frozen=True)
class Graph:
    """Immutable undirected, unweighted graph.

    Attributes:
        n: number of nodes.
        adj: symmetric CSR adjacency with entries in {0, 1} and zero diagonal.
        features: optional (n, d) float64 node feature matrix.
    """

    n: int
    adj: sp.csr_matrix
    features: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.adj.shape != (self.n, self.n):
            raise ValueError(f"adjacency shape {self.adj.shape} != ({self.n}, {self.n})")
        if self.adj.nnz:
            if self.adj.diagonal().any():
                raise ValueError("raw adjacency must not contain self-loops")
            data = self.adj.data
            if not np.all((data == 0.0) | (data == 1.0)):
                raise ValueError("adjacency entries must be 0 or 1")
            if (self.adj != self.adj.T).nnz != 0:
                raise ValueError("adjacency must be symmetric")
        if self.features is not None:
            feats = np.ascontiguousarray(self.features, dtype=np.float64)
            if feats.ndim != 2 or feats.shape[0] != self.n:
                raise ValueError(f"features must be ({self.n}, d), got {feats.shape}")
            if not np.all(np.isfinite(feats)):
                raise ValueError("features contain non-finite values")
            feats.flags.writeable = False
            object.__setattr__(self, "features", feats)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        features: Optional[np.ndarray] = None,
    ) -> "Graph":
        """Build a graph from an edge iterable.

        Duplicate and reversed duplicate edges are merged; self-loops are
        dropped (the raw adjacency never stores them).
        """
        pairs = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                continue
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            pairs.add((min(u, v), max(u, v)))
        if pairs:
            ordered = sorted(pairs)
            r = np.asarray([p[0] for p in ordered] + [p[1] for p in ordered])
            c = np.asarray([p[1] for p in ordered] + [p[0] for p in ordered])
            data = np.ones(len(r), dtype=np.float64)
            adj = sp.csr_matrix((data, (r, c)), shape=(n, n))
        else:
            adj = sp.csr_matrix((n, n), dtype=np.float64)
        return cls(n=n, adj=adj, features=features)

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adj.sum(axis=1)).ravel()

    def with_features(self, features: np.ndarray) -> "Graph":
        return Graph(n=self.n, adj=self.adj, features=features)

    def permuted(self, perm: np.ndarray) -> "Graph":
        """Relabel nodes so new index perm[i] holds old node i."""
        perm = np.asarray(perm)
        p = sp.csr_matrix(
            (np.ones(self.n), (perm, np.arange(self.n))), shape=(self.n, self.n)
        )
        adj = (p @ self.adj @ p.T).tocsr()
        feats = None
        if self.features is not None:
            inv = np.empty(self.n, dtype=int)
            inv[perm] = np.arange(self.n)
            feats = np.asarray(self.features)[inv]
        return Graph(n=self.n, adj=adj, features=feats)


@dataclass(frozen=True)
class NormalizedOperator:
    """A normalization of a graph's adjacency or Laplacian, kept sparse."""

    kind: OperatorKind
    matrix: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _inv_sqrt_degrees(deg: np.ndarray) -> np.ndarray:
    out = np.zeros_like(deg)
    nz = deg > 0
    out[nz] = 1.0 / np.sqrt(deg[nz])
    return out


def build_sym_laplacian(g: Graph) -> NormalizedOperator:
    """I - D^{-1/2} A D^{-1/2}; isolated nodes keep a diagonal of 1."""
    dis = _inv_sqrt_degrees(g.degrees())
    d = sp.diags(dis)
    lap = sp.identity(g.n, format="csr") - (d @ g.adj @ d)
    return NormalizedOperator(OperatorKind.SYM_LAPLACIAN, lap.tocsr())


def build_sym_adj(g: Graph) -> NormalizedOperator:
    """D^{-1/2} A D^{-1/2}, the entrywise complement of the Laplacian to I."""
    dis = _inv_sqrt_degrees(g.degrees())
    d = sp.diags(dis)
    return NormalizedOperator(OperatorKind.SYM_ADJ, (d @ g.adj @ d).tocsr())


def build_renorm_adj(g: Graph) -> NormalizedOperator:
    """D~^{-1/2} (A + I) D~^{-1/2} with D~ the degrees of A + I."""
    a_tilde = (g.adj + sp.identity(g.n, format="csr")).tocsr()
    deg = np.asarray(a_tilde.sum(axis=1)).ravel()
    d = sp.diags(1.0 / np.sqrt(deg)) if g.n else sp.diags(deg)
    return NormalizedOperator(OperatorKind.RENORM_ADJ, (d @ a_tilde @ d).tocsr())


def build_left_norm_adj(g: Graph) -> NormalizedOperator:
    """D^{-1} A; rows of isolated nodes are all zero."""
    deg = g.degrees()
    dinv = np.zeros_like(deg)
    nz = deg > 0
    dinv[nz] = 1.0 / deg[nz]
    return NormalizedOperator(OperatorKind.LEFT_NORM_ADJ, (sp.diags(dinv) @ g.adj).tocsr())


def build_operator(g: Graph, kind: OperatorKind) -> NormalizedOperator:
    builders = {
        OperatorKind.SYM_LAPLACIAN: build_sym_laplacian,
        OperatorKind.SYM_ADJ: build_sym_adj,
        OperatorKind.RENORM_ADJ: build_renorm_adj,
        OperatorKind.LEFT_NORM_ADJ: build_left_norm_adj,
    }
    return builders[kind](g)


def spmm(op: NormalizedOperator, x: np.ndarray) -> np.ndarray:
    """Sparse-dense product op.matrix @ x for an (n, c) dense block."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != op.n:
        raise ValueError(f"operand shape {x.shape} incompatible with operator n={op.n}")
    return np.asarray(op.matrix @ x)
