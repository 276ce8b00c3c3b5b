"""KNN feature graph, normalized propagation operator, and graph statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import InsufficientDataError, ParameterError, ShapeError

DEFAULT_K = 10


@dataclass(frozen=True)
class FeatureGraph:
    """Standardized node features, undirected KNN edges, labels and fold masks."""

    x: np.ndarray
    edges: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray | None = None
    test_mask: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        labels = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2:
            raise ShapeError("node feature matrix must be 2-D")
        n = x.shape[0]
        if labels.shape != (n,):
            raise ShapeError("labels must have one entry per node")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ParameterError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ParameterError("self-loops are not allowed")
            canon = np.sort(edges, axis=1)
            if np.unique(canon, axis=0).shape[0] != canon.shape[0]:
                raise ParameterError("duplicate undirected edge")
        for name in ("train_mask", "test_mask"):
            mask = getattr(self, name)
            if mask is not None:
                mask = np.asarray(mask, dtype=bool)
                if mask.shape != (n,):
                    raise ShapeError(f"{name} must have one entry per node")
                object.__setattr__(self, name, mask)
        if self.train_mask is not None and self.test_mask is not None:
            if np.any(self.train_mask & self.test_mask):
                raise ParameterError("train and test masks must be disjoint")
        if self.train_mask is not None and np.any(self.train_mask):
            classes = np.unique(labels[self.train_mask])
            if classes.size < 2:
                raise ParameterError("train mask must contain both classes")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "labels", labels)

    @property
    def n_nodes(self) -> int:
        return int(self.x.shape[0])

    def with_masks(self, train_idx, test_idx) -> "FeatureGraph":
        train = np.zeros(self.n_nodes, dtype=bool)
        test = np.zeros(self.n_nodes, dtype=bool)
        train[np.asarray(train_idx, dtype=int)] = True
        test[np.asarray(test_idx, dtype=int)] = True
        return FeatureGraph(
            x=self.x, edges=self.edges, labels=self.labels, train_mask=train, test_mask=test
        )


@dataclass(frozen=True)
class GraphStats:
    average_degree: float
    average_degree_centrality: float
    average_clustering_coefficient: float


def knn_graph(x: np.ndarray, k: int = DEFAULT_K) -> np.ndarray:
    """Undirected edges of the union-symmetrized Euclidean k-NN relation.

    Each node points at its k nearest other nodes (ties broken by lower node
    index); the directed relation is symmetrized by union. Returns a
    (m, 2) array of node index pairs with u < v, sorted lexicographically.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ShapeError("feature matrix must be 2-D")
    n = x.shape[0]
    if k < 1:
        raise ParameterError("k must be >= 1")
    if n <= k:
        raise ParameterError(f"need more than k={k} nodes, got {n}")

    pairs = set()
    block = max(1, min(n, 2_000_000 // max(n, 1) + 1))
    sq_norms = np.einsum("ij,ij->i", x, x)
    for lo in range(0, n, block):
        hi = min(n, lo + block)
        # exact squared distances; clip tiny negatives from cancellation
        d2 = sq_norms[lo:hi, None] + sq_norms[None, :] - 2.0 * (x[lo:hi] @ x.T)
        np.maximum(d2, 0.0, out=d2)
        rows = np.arange(lo, hi)
        d2[np.arange(hi - lo), rows] = np.inf
        order = np.argsort(d2, axis=1, kind="stable")
        for r, i in enumerate(rows):
            for j in order[r, :k]:
                j = int(j)
                pairs.add((i, j) if i < j else (j, i))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    edges = np.array(sorted(pairs), dtype=np.int64)
    return edges


def adjacency_matrix(edges: np.ndarray, n: int) -> sp.csr_matrix:
    """0/1 symmetric adjacency of an undirected edge list."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size == 0:
        return sp.csr_matrix((n, n))
    u = np.concatenate([edges[:, 0], edges[:, 1]])
    v = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.ones(u.size, dtype=float)
    return sp.csr_matrix((data, (u, v)), shape=(n, n))


def normalize_adjacency(graph: FeatureGraph) -> sp.csr_matrix:
    """Symmetrically normalized propagation operator with self-loops.

    Adds the identity to the adjacency and rescales by inverse square-root
    degrees, so an isolated node keeps weight 1 on itself and all
    eigenvalues lie in [-1, 1].
    """
    n = graph.n_nodes
    a_tilde = adjacency_matrix(graph.edges, n) + sp.identity(n, format="csr")
    degrees = np.asarray(a_tilde.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(degrees)
    d_inv = sp.diags(inv_sqrt)
    return (d_inv @ a_tilde @ d_inv).tocsr()


def graph_stats(graph: FeatureGraph) -> GraphStats:
    """Average degree, degree centrality, and local clustering coefficient."""
    n = graph.n_nodes
    if n < 2:
        raise InsufficientDataError("graph statistics need at least 2 nodes")
    degrees = np.zeros(n, dtype=np.int64)
    neighbors: list[set[int]] = [set() for _ in range(n)]
    for u, v in graph.edges:
        u, v = int(u), int(v)
        neighbors[u].add(v)
        neighbors[v].add(u)
        degrees[u] += 1
        degrees[v] += 1
    avg_degree = 2.0 * graph.edges.shape[0] / n
    centrality = float(np.mean(degrees / (n - 1)))
    clustering = np.zeros(n, dtype=float)
    for node in range(n):
        deg = degrees[node]
        if deg < 2:
            continue
        # count neighbor pairs that are themselves connected
        links = 0
        nbrs = sorted(neighbors[node])
        for a_i, a in enumerate(nbrs):
            links += len(neighbors[a].intersection(nbrs[a_i + 1 :]))
        clustering[node] = 2.0 * links / (deg * (deg - 1))
    return GraphStats(
        average_degree=float(avg_degree),
        average_degree_centrality=centrality,
        average_clustering_coefficient=float(np.mean(clustering)),
    )


def write_edge_list(graph: FeatureGraph, path, header: dict | None = None) -> None:
    """Write edges as 'u v' lines preceded by a one-line JSON header comment."""
    path = Path(path)
    meta = {"n": graph.n_nodes, "edges": int(graph.edges.shape[0])}
    if header:
        meta.update(header)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        for u, v in graph.edges:
            fh.write(f"{int(u)} {int(v)}\n")
