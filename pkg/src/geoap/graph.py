"""Undirected graph topology: profiles, topological distances, neighborhood masks.

Vertices are dense integers ``0..n-1``. Graphs are simple (no self-loops,
no parallel edges) and immutable once constructed. Hop distances between
disconnected vertices are reported as the out-of-band sentinel
:data:`UNREACHABLE` (= ``math.inf``), which is never ``<=`` any finite
threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

#: Sentinel hop distance between vertices in different components.
UNREACHABLE = math.inf


class TopoDistance(Enum):
    """Topological distance used to carve out vertex neighborhoods."""

    SHORTEST_PATH = "shortest-path"
    JACCARD = "jaccard"
    COSINE = "cosine"


class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of vertices (may exceed the largest endpoint: extra
        vertices are isolated).
    edges : iterable of (int, int)
        Undirected edges. Duplicates and reversed duplicates collapse to
        a single edge. Self-loops are rejected.
    """

    def __init__(self, n, edges=()):
        if n < 0:
            raise ValueError(f"vertex count must be nonnegative, got {n}")
        self._n = int(n)
        seen = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < self._n and 0 <= v < self._n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self._n}")
            if u == v:
                raise ValueError(f"self-loop ({u}, {v}) not allowed")
            seen.add((u, v) if u < v else (v, u))
        self._edges = tuple(sorted(seen))
        adj = [[] for _ in range(self._n)]
        for u, v in self._edges:
            adj[u].append(v)
            adj[v].append(u)
        self._adj = tuple(np.array(sorted(a), dtype=np.intp) for a in adj)
        self._hops = None  # lazy all-pairs hop matrix

    @property
    def n(self):
        return self._n

    @property
    def m(self):
        return len(self._edges)

    @property
    def edges(self):
        return self._edges

    def neighbors(self, v):
        return self._adj[v]

    def degree(self, v):
        return len(self._adj[v])

    def has_edge(self, u, v):
        if not hasattr(self, "_eset"):
            self._eset = frozenset(self._edges)
        return (min(u, v), max(u, v)) in self._eset

    def adjacency_matrix(self):
        """Dense boolean adjacency matrix (symmetric, False diagonal)."""
        a = np.zeros((self._n, self._n), dtype=bool)
        if self._edges:
            e = np.asarray(self._edges, dtype=np.intp)
            a[e[:, 0], e[:, 1]] = True
            a[e[:, 1], e[:, 0]] = True
        return a

    def __repr__(self):
        return f"Graph(n={self._n}, m={self.m})"


def adjacency_profile(g, v):
    """Binary profile of vertex ``v``: a length-n boolean vector marking
    its direct neighbors. The vertex itself is not part of its profile."""
    if not (0 <= v < g.n):
        raise ValueError(f"vertex {v} out of range")
    p = np.zeros(g.n, dtype=bool)
    p[g.neighbors(v)] = True
    return p


def jaccard_distance(g, u, v):
    """Jaccard distance between the adjacency profiles of ``u`` and ``v``.

    Counting positions where exactly one profile is set (c10 + c01)
    against positions where either is set, the distance is
    ``(c10 + c01) / (c10 + c01 + c11)``. Same vertex: 0. Two distinct
    vertices whose profiles share no set positions (including isolated
    vertices) are maximally distant: 1.
    """
    if u == v:
        return 0.0
    pu, pv = adjacency_profile(g, u), adjacency_profile(g, v)
    c11 = int(np.count_nonzero(pu & pv))
    c10 = int(np.count_nonzero(pu & ~pv))
    c01 = int(np.count_nonzero(~pu & pv))
    denom = c10 + c01 + c11
    if denom == 0:
        return 1.0
    return (c10 + c01) / denom


def cosine_topo_distance(g, u, v):
    """Cosine distance ``1 - p_u . p_v / (|p_u| |p_v|)`` between adjacency
    profiles. Same vertex: 0. Any isolated endpoint (zero profile): 1."""
    if u == v:
        return 0.0
    du, dv = g.degree(u), g.degree(v)
    if du == 0 or dv == 0:
        return 1.0
    pu, pv = adjacency_profile(g, u), adjacency_profile(g, v)
    c11 = int(np.count_nonzero(pu & pv))
    return 1.0 - c11 / math.sqrt(du * dv)


def _bfs_hops(g, source, cutoff=None):
    """Hop distances from ``source`` by breadth-first level expansion.

    Returns a float vector with UNREACHABLE where no path exists (or the
    search was cut off at ``cutoff`` hops).
    """
    dist = np.full(g.n, UNREACHABLE)
    dist[source] = 0.0
    frontier = [source]
    depth = 0
    while frontier and (cutoff is None or depth < cutoff):
        depth += 1
        nxt = []
        for u in frontier:
            for w in g.neighbors(u):
                if dist[w] == UNREACHABLE:
                    dist[w] = depth
                    nxt.append(int(w))
        frontier = nxt
    return dist


def shortest_path_hops(g):
    """All-pairs hop-count matrix (float, UNREACHABLE off-component).

    Computed lazily per graph and cached; repeated calls are free.
    """
    if g._hops is None:
        hops = np.empty((g.n, g.n))
        for s in range(g.n):
            hops[s] = _bfs_hops(g, s)
        g._hops = hops
    return g._hops


def graph_power_reach(g, nu):
    """Boolean matrix marking vertex pairs joined by a walk of length
    1..nu, i.e. the indicator of ``A + A^2 + ... + A^nu``.

    Computed in the boolean semiring step by step, so entries never
    overflow. Off the diagonal this is equivalent to hop distance <= nu;
    the diagonal marks vertices lying on some closed walk (any
    non-isolated vertex once nu >= 2).
    """
    if nu < 1 or int(nu) != nu:
        raise ValueError(f"walk bound must be a positive integer, got {nu}")
    a = g.adjacency_matrix()
    af = a.astype(np.float64)
    reach = a.copy()
    step = a.copy()
    for _ in range(int(nu) - 1):
        step = (step.astype(np.float64) @ af) > 0
        reach |= step
    return reach


@dataclass(frozen=True)
class NeighborhoodMask:
    """Boolean membership matrix of topological neighborhoods.

    ``member[i, k]`` says vertex ``k`` lies within distance ``tau`` of
    vertex ``i`` under ``kind``. Always symmetric with a True diagonal.
    Keeps a reference to the graph it was built from so downstream label
    smoothing can reach the adjacency structure.
    """

    member: np.ndarray
    kind: TopoDistance
    tau: float
    graph: Graph = field(repr=False, compare=False, default=None)

    @property
    def n(self):
        return self.member.shape[0]


def _pairwise_profile_distances(g, kind):
    """Dense Jaccard or cosine distance matrix between adjacency profiles."""
    a = g.adjacency_matrix().astype(np.float64)
    deg = a.sum(axis=1)
    c11 = a @ a.T  # common-neighbor counts
    if kind is TopoDistance.JACCARD:
        union = deg[:, None] + deg[None, :] - c11
        with np.errstate(invalid="ignore", divide="ignore"):
            dist = (union - c11) / union
        dist[union == 0] = 1.0  # both profiles empty
    else:
        norm = np.sqrt(deg[:, None] * deg[None, :])
        with np.errstate(invalid="ignore", divide="ignore"):
            dist = 1.0 - c11 / norm
        dist[norm == 0] = 1.0  # isolated endpoint
    np.fill_diagonal(dist, 0.0)
    return dist


def neighborhood_mask(g, kind, tau):
    """Build the neighborhood membership mask for threshold ``tau``.

    Shortest-path thresholds are nonnegative integers (hop counts);
    Jaccard and cosine thresholds live in [0, 1]. Self-membership is
    forced, and masks grow monotonically with ``tau``.
    """
    if not isinstance(kind, TopoDistance):
        raise ValueError(f"unknown distance kind: {kind!r}")
    if kind is TopoDistance.SHORTEST_PATH:
        if tau < 0 or float(tau) != int(tau):
            raise ValueError(f"shortest-path threshold must be a nonnegative integer, got {tau}")
        tau = int(tau)
        member = np.zeros((g.n, g.n), dtype=bool)
        for s in range(g.n):
            d = _bfs_hops(g, s, cutoff=tau)
            member[s] = d <= tau
    else:
        if not (0.0 <= tau <= 1.0):
            raise ValueError(f"{kind.value} threshold must lie in [0, 1], got {tau}")
        member = _pairwise_profile_distances(g, kind) <= tau
    np.fill_diagonal(member, True)
    return NeighborhoodMask(member=member, kind=kind, tau=float(tau), graph=g)


def permute_vertices(g, perm):
    """Relabel vertices through the bijection ``perm`` (old id -> new id).

    The structure is untouched: degree sequences and hop-distance
    multisets are preserved, only identities move.
    """
    perm = np.asarray(perm, dtype=np.intp)
    if perm.shape != (g.n,) or not np.array_equal(np.sort(perm), np.arange(g.n)):
        raise ValueError("perm must be a permutation of 0..n-1")
    return Graph(g.n, [(perm[u], perm[v]) for u, v in g.edges])
