"""Undirected graph topologies, incidence matrices and Laplacian assembly.

Vertices are 0-based. Every edge is stored in canonical orientation
``(s, t)`` with ``s < t`` and the edge list is sorted lexicographically, so
edge index ``j`` (and incidence column ``j``) is deterministic for a given
edge set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class UnionFind:
    """Disjoint-set forest with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.count = n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if they were already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True


@dataclass(frozen=True)
class GraphTopology:
    """Vertex count plus an undirected edge list (and optional self-loops).

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : sequence of (int, int)
        Undirected pairs. Orientation is canonicalised to ``s < t`` and the
        list is sorted; duplicates and ``(i, i)`` pairs are rejected.
    self_loops : sequence of int, optional
        Vertices carrying a self-loop (generalized Laplacians only).
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    self_loops: tuple[int, ...] = field(default=())

    def __init__(self, n: int, edges: Iterable[Sequence[int]], self_loops: Iterable[int] = ()):
        n = int(n)
        if n < 1:
            raise ValueError(f"vertex count must be >= 1, got {n}")
        canon = []
        for e in edges:
            s, t = (int(e[0]), int(e[1]))
            if s == t:
                raise ValueError(f"edge ({s}, {t}) is a self-loop; use self_loops")
            if not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"edge ({s}, {t}) out of range for n={n}")
            canon.append((min(s, t), max(s, t)))
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise ValueError(f"duplicate edge {a}")
        loops = sorted(int(k) for k in self_loops)
        if len(set(loops)) != len(loops):
            raise ValueError("duplicate self-loop")
        if any(not 0 <= k < n for k in loops):
            raise ValueError("self-loop vertex out of range")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(canon))
        object.__setattr__(self, "self_loops", tuple(loops))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def sources(self) -> np.ndarray:
        return np.array([s for s, _ in self.edges], dtype=np.intp)

    @property
    def targets(self) -> np.ndarray:
        return np.array([t for _, t in self.edges], dtype=np.intp)

    def subgraph(self, edge_indices: Iterable[int]) -> "GraphTopology":
        """Topology on the same vertices keeping only the given edges."""
        return GraphTopology(self.n, [self.edges[j] for j in edge_indices])

    @classmethod
    def path(cls, n: int) -> "GraphTopology":
        return cls(n, [(k, k + 1) for k in range(n - 1)])


class Structure(NamedTuple):
    connected: bool
    acyclic: bool
    components: int


def classify_structure(topology: GraphTopology) -> Structure:
    """Connectivity and acyclicity from a single union-find pass."""
    uf = UnionFind(topology.n)
    acyclic = True
    for s, t in topology.edges:
        if not uf.union(s, t):
            acyclic = False
    return Structure(connected=uf.count == 1, acyclic=acyclic, components=uf.count)


def build_incidence(topology: GraphTopology, extended: bool = False) -> np.ndarray:
    """Oriented incidence matrix with column ``j = e_s - e_t``.

    With ``extended=True`` a column of ones is appended, giving the
    ``n x (m + 1)`` matrix whose Gram form with weights ``(u, 1/n)`` is
    ``L + 11^T/n``.
    """
    n, m = topology.n, topology.m
    xi = np.zeros((n, m + int(extended)))
    cols = np.arange(m)
    xi[topology.sources, cols] = 1.0
    xi[topology.targets, cols] = -1.0
    if extended:
        xi[:, m] = 1.0
    return xi


def assemble_laplacian(topology: GraphTopology, u, v=None) -> np.ndarray:
    """Dense Laplacian ``sum_j u_j xi_j xi_j^T + sum_k v_k e_k e_k^T``.

    ``v`` may be a length-``n`` vector of per-vertex self-loop weights.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (topology.m,):
        raise ValueError(f"expected {topology.m} edge weights, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("edge weights must be finite")
    n = topology.n
    s, t = topology.sources, topology.targets
    L = np.zeros((n, n))
    np.add.at(L, (s, t), -u)
    np.add.at(L, (t, s), -u)
    np.add.at(L, (s, s), u)
    np.add.at(L, (t, t), u)
    if v is not None:
        v = np.asarray(v, dtype=float)
        if v.shape != (n,):
            raise ValueError(f"expected {n} self-loop weights, got shape {v.shape}")
        L[np.diag_indices(n)] += v
    return L


@dataclass(frozen=True)
class WeightedLaplacian:
    """A topology with edge weights ``u`` and optional per-vertex loop weights ``v``."""

    topology: GraphTopology
    u: np.ndarray
    v: np.ndarray | None = None

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.shape != (self.topology.m,):
            raise ValueError(f"expected {self.topology.m} edge weights, got shape {u.shape}")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if self.v is not None:
            v = np.array(self.v, dtype=float)
            if v.shape != (self.topology.n,):
                raise ValueError(f"expected {self.topology.n} self-loop weights")
            v.setflags(write=False)
            object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.topology.n

    def matrix(self) -> np.ndarray:
        return assemble_laplacian(self.topology, self.u, self.v)
