"""Input graphs, subgraph restrictions and brute-force ground truth.

Vertices are ``0..n-1``.  An edge is the ordered pair ``(u, v)`` with
``u < v``; the same pairs index the bits of the hidden input string of the
query model (see :func:`pair_index`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .exceptions import InputError, ParseError

__all__ = [
    "Graph",
    "EdgeSet",
    "Marking",
    "pair_index",
    "all_pairs",
    "induced_subgraph",
    "bipartite_subgraph",
    "edge_restricted",
    "has_triangle",
    "has_graph_collision",
    "contains_subgraph",
    "random_graph",
    "parse_graph",
    "format_graph",
    "complete_graph",
    "path_graph",
]


def all_pairs(n):
    """All vertex pairs ``(u, v)`` with ``u < v`` in lexicographic order."""
    return list(itertools.combinations(range(n), 2))


def pair_index(u, v, n):
    """Position of pair ``{u, v}`` in :func:`all_pairs` order."""
    if u == v:
        raise InputError(f"no pair index for a loop ({u}, {u})")
    if u > v:
        u, v = v, u
    if not (0 <= u and v < n):
        raise InputError(f"pair ({u}, {v}) out of range for n={n}")
    # rows 0..u-1 contribute (n-1) + (n-2) + ... + (n-u) pairs
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def _canon_edges(pairs, n):
    out = set()
    for p in pairs:
        u, v = (int(p[0]), int(p[1]))
        if u == v:
            raise InputError(f"loop ({u}, {v}) is not an edge")
        if not (0 <= u < n and 0 <= v < n):
            raise InputError(f"edge ({u}, {v}) out of range for n={n}")
        out.add((min(u, v), max(u, v)))
    return frozenset(out)


@dataclass(frozen=True)
class EdgeSet:
    """Set of unordered vertex pairs over ``range(n)``."""

    n: int
    pairs: frozenset

    @classmethod
    def from_pairs(cls, pairs, n):
        return cls(int(n), _canon_edges(pairs, n))

    @classmethod
    def all(cls, n):
        return cls(int(n), frozenset(all_pairs(n)))

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair):
        u, v = pair
        return (min(u, v), max(u, v)) in self.pairs


@dataclass(frozen=True)
class Marking:
    """Binary vertex marking for graph collision."""

    bits: tuple

    @classmethod
    def from_bits(cls, bits):
        b = tuple(int(x) for x in bits)
        if any(x not in (0, 1) for x in b):
            raise InputError("marking bits must be 0 or 1")
        return cls(b)

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]


class Graph:
    """Undirected simple graph stored as a symmetric boolean matrix.

    Instances are immutable; the adjacency array is read-only.
    """

    __slots__ = ("_adj", "_labels")

    def __init__(self, adj, labels=None):
        a = np.array(adj, dtype=bool)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError("adjacency matrix must be square")
        if not np.array_equal(a, a.T):
            raise InputError("adjacency matrix must be symmetric")
        if a.diagonal().any():
            raise InputError("adjacency matrix must have a zero diagonal")
        a.setflags(write=False)
        self._adj = a
        # labels of the vertices in the parent graph, for derived subgraphs
        self._labels = tuple(range(a.shape[0])) if labels is None else tuple(labels)

    @classmethod
    def from_edges(cls, n, edges: Iterable = ()):
        a = np.zeros((n, n), dtype=bool)
        for u, v in _canon_edges(edges, n):
            a[u, v] = a[v, u] = True
        return cls(a)

    @classmethod
    def from_bits(cls, n, bits):
        """Inverse of :attr:`bits`: one bit per pair in :func:`all_pairs` order."""
        bits = list(bits)
        pairs = all_pairs(n)
        if len(bits) != len(pairs):
            raise InputError(f"expected {len(pairs)} bits for n={n}, got {len(bits)}")
        return cls.from_edges(n, [p for p, b in zip(pairs, bits) if b])

    @property
    def n(self):
        return self._adj.shape[0]

    @property
    def adj(self):
        return self._adj

    @property
    def labels(self):
        """Original vertex names (identity unless the graph was derived)."""
        return self._labels

    @property
    def bits(self):
        """Hidden input string: adjacency bit per pair in :func:`all_pairs` order."""
        return tuple(int(self._adj[u, v]) for u, v in all_pairs(self.n))

    def edges(self):
        us, vs = np.nonzero(np.triu(self._adj, 1))
        return [(int(u), int(v)) for u, v in zip(us, vs)]

    def has_edge(self, u, v):
        return bool(self._adj[u, v])

    def degree(self, v):
        return int(self._adj[v].sum())

    def __eq__(self, other):
        return isinstance(other, Graph) and np.array_equal(self._adj, other._adj)

    def __hash__(self):
        return hash((self.n, self._adj.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edges()})"


def _check_vertices(G, R, what="vertex set"):
    R = sorted(set(int(v) for v in R))
    for v in R:
        if not 0 <= v < G.n:
            raise InputError(f"{what} contains {v}, outside range(0, {G.n})")
    return R


def induced_subgraph(G: Graph, R) -> Graph:
    """Subgraph induced by ``R``, relabelled ``0..|R|-1`` in increasing order."""
    R = _check_vertices(G, R)
    idx = np.array(R, dtype=int)
    sub = G.adj[np.ix_(idx, idx)] if len(idx) else np.zeros((0, 0), dtype=bool)
    return Graph(sub, labels=R)


def bipartite_subgraph(G: Graph, R, S) -> Graph:
    """Graph on ``R ∪ S`` keeping only edges with one end in ``R`` and one in ``S``.

    Vertices are relabelled by increasing original index.
    """
    R = _check_vertices(G, R)
    S = _check_vertices(G, S)
    verts = sorted(set(R) | set(S))
    pos = {v: i for i, v in enumerate(verts)}
    edges = []
    for u in R:
        for v in S:
            if u != v and G.adj[u, v]:
                edges.append((pos[u], pos[v]))
    H = Graph.from_edges(len(verts), edges)
    return Graph(H.adj, labels=verts)


def edge_restricted(G: Graph, F) -> Graph:
    """``G`` restricted to the edges of ``F`` (same vertex set)."""
    if isinstance(F, EdgeSet):
        if F.n != G.n:
            raise InputError("edge set and graph have different vertex counts")
        pairs = F.pairs
    else:
        pairs = _canon_edges(F, G.n)
    return Graph.from_edges(G.n, [p for p in pairs if G.adj[p]])


def has_triangle(G: Graph) -> Optional[tuple]:
    """Lexicographically least triangle ``(a, b, c)`` of ``G``, or ``None``."""
    A = G.adj
    for a, b, c in itertools.combinations(range(G.n), 3):
        if A[a, b] and A[a, c] and A[b, c]:
            return (a, b, c)
    return None


def has_graph_collision(G: Graph, m) -> Optional[tuple]:
    """Least adjacent pair of ``G`` with both endpoints marked, or ``None``."""
    bits = m.bits if isinstance(m, Marking) else tuple(int(b) for b in m)
    if len(bits) != G.n:
        raise InputError(f"marking has length {len(bits)}, graph has {G.n} vertices")
    for u, v in G.edges():
        if bits[u] and bits[v]:
            return (u, v)
    return None


def contains_subgraph(G: Graph, H: Graph, induced=False) -> bool:
    """Whether ``G`` contains a copy of ``H``.

    By default a copy is an injective map of ``V(H)`` into ``V(G)`` carrying
    every edge of ``H`` onto an edge of ``G``.  With ``induced=True`` the
    image must also carry non-edges onto non-edges.  Exhaustive search,
    meant for patterns of at most five vertices.
    """
    k = H.n
    if k > G.n:
        raise InputError(f"pattern has {k} vertices, host only {G.n}")
    if k > 5:
        raise InputError("exhaustive containment is limited to patterns on <= 5 vertices")
    h_edges = H.edges()
    A = G.adj
    for image in itertools.permutations(range(G.n), k):
        if all(A[image[u], image[v]] for u, v in h_edges):
            if not induced:
                return True
            if all(
                A[image[u], image[v]] == H.adj[u, v]
                for u, v in itertools.combinations(range(k), 2)
            ):
                return True
    return False


def complete_graph(n):
    return Graph.from_edges(n, all_pairs(n))


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def random_graph(n, p, rng):
    """Erdős–Rényi sample ``G(n, p)`` drawn from ``rng``."""
    draws = rng.random(n * (n - 1) // 2) < p
    return Graph.from_bits(n, draws.astype(int))


def parse_graph(text: str) -> Graph:
    """Parse the edge-list text format.

    First significant line is the vertex count; each following line is
    ``u v``.  Blank lines and ``#`` comments are ignored.
    """
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise ParseError("empty graph file")
    try:
        n = int(lines[0])
    except ValueError:
        raise ParseError(f"first line must be the vertex count, got {lines[0]!r}") from None
    if n < 0:
        raise ParseError("vertex count must be non-negative")
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"edge line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"edge line {lineno}: non-integer vertex in {line!r}") from None
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise ParseError(f"edge line {lineno}: invalid edge ({u}, {v}) for n={n}")
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def format_graph(G: Graph) -> str:
    lines = [str(G.n)] + [f"{u} {v}" for u, v in G.edges()]
    return "\n".join(lines) + "\n"
