"""Runnable walk algorithms for triangle finding and graph collision.

Every algorithm reads the graph only through a :class:`QueryOracle` over
its adjacency bits (pair order of :func:`~nestedwalk.graphs.all_pairs`).
The ``G`` argument supplies the vertex count and, when no oracle is given,
the bits for a fresh one.

Triangle checks search for a third vertex ``k`` with amplitude
amplification over all ``n`` vertices.  Each candidate is tested by a graph
collision walk on the stored edges, marking the stored vertices adjacent
to ``k``; those adjacency bits are queried fresh, the stored edges are read
from the walk's data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Optional

import numpy as np

from .data import BitRecord
from .exceptions import InputError
from .graphs import Graph, Marking, pair_index
from .markov import johnson_chain, product_chain, single_state_chain
from .nested import OuterLevel, TruncationInstance, compose_two_level, markov_budget
from .oracle import BoundedCheck, QueryOracle, boost
from .hilbert import RegisterLayout, identity
from .walk import (
    Checker,
    PredicateChecker,
    WalkLevelSpec,
    bbht_success,
    boosted_search,
    exact_detect_queries,
    search,
)

__all__ = [
    "TriangleParams",
    "RunResult",
    "collision_walk_spec",
    "graph_collision_walk",
    "collision_probability",
    "TriangleChecker",
    "mss_spec",
    "nested_3527_spec",
    "nested_97_spec",
    "triangle_mss",
    "triangle_nested_3527",
    "triangle_nested_97",
    "run_walk",
    "collision_set_size",
    "asymptotic_budget_3527",
]

_CHECK_TARGET = 1e-4


@dataclass(frozen=True)
class TriangleParams:
    """Parameters of the triangle walks.

    ``r``: outer set size; ``s``: sparsification fraction in ``(1/r, 1]``;
    ``r1 <= r2 <= r1**2``: the two set sizes of the two-vertex-set walk;
    ``m``: graph-collision set size (``None`` picks ``round((r1 r2)^(1/3))``);
    ``markov_k``: multiplier of the truncation budget.
    """

    r: int = 3
    s: Fraction = Fraction(1, 3)
    r1: int = 2
    r2: int = 2
    m: Optional[int] = None
    markov_k: float = 7.0
    budget: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "s", Fraction(self.s).limit_denominator(10**6))
        if self.r < 1:
            raise InputError("r must be at least 1")
        if not 0 < self.s <= 1:
            raise InputError("s must lie in (0, 1]")
        if not 1 <= self.r1 <= self.r2 <= self.r1 ** 2:
            raise InputError("need 1 <= r1 <= r2 <= r1^2")

    def inner_size(self):
        """``t = round(s C(r,2))``, at least 1."""
        return max(1, int(round(self.s * comb(self.r, 2))))

    def check(self, n):
        if not 2 <= self.r <= n:
            raise InputError(f"r = {self.r} must lie in [2, n = {n}]")


def collision_set_size(r1, r2):
    """``m = round((r1 r2)^(1/3))`` clipped to ``[1, r1]``."""
    return max(1, min(r1, int(round((r1 * r2) ** (1.0 / 3.0)))))


# ---------------------------------------------------------------------------
# graph collision


def _class_chain(r, m):
    if m == r:
        return single_state_chain(tuple(range(r)))
    return johnson_chain(r, m)


def collision_walk_spec(template: Graph, r1, r2, m, oracle) -> WalkLevelSpec:
    """Walk on ``J(r1, m) × J(r2, m)`` storing the marking bits of both sets.

    ``template`` has vertices ``0..r1-1`` (first class) and ``r1..r1+r2-1``
    (second class); only edges across the classes matter.  ``oracle`` reads
    the ``r1 + r2`` marking bits.  Checking reads the data and costs no
    queries.
    """
    if template.n != r1 + r2:
        raise InputError("template must have r1 + r2 vertices")
    if not 1 <= m <= min(r1, r2):
        raise InputError("m must lie in [1, min(r1, r2)]")
    chain = product_chain(_class_chain(r1, m), _class_chain(r2, m))
    adj = template.adj
    records = []
    for S1, S2 in chain.states:
        slots = list(S1) + [r1 + j for j in S2]
        records.append(BitRecord.read(slots, oracle, label=(S1, S2)))

    def collides(label, rec):
        S1, S2 = label
        marks = rec.values
        for a, i in enumerate(S1):
            if not marks[a]:
                continue
            for b, j in enumerate(S2):
                if marks[m + b] and adj[i, r1 + j]:
                    return True
        return False

    eps = (m / r1) * (m / r2)
    return WalkLevelSpec(chain, tuple(records), PredicateChecker(collides, 0, "collision"), eps,
                         name="graph-collision", meta={"r1": r1, "r2": r2, "m": m})


def graph_collision_walk(G: Graph, mk, m, o=None, r1=None, rng=None, target_error=None,
                         backend="exact"):
    """Decide whether two adjacent vertices across the classes are both marked.

    ``G`` is bipartite with classes ``0..r1-1`` and ``r1..n-1`` (``r1``
    defaults to ``n // 2``).  ``o`` reads the marking; by default an oracle
    over ``mk`` is created.
    """
    bits = mk.bits if isinstance(mk, Marking) else tuple(int(b) for b in mk)
    if len(bits) != G.n:
        raise InputError(f"marking has length {len(bits)}, graph has {G.n} vertices")
    r1 = G.n // 2 if r1 is None else r1
    r2 = G.n - r1
    o = QueryOracle(bits) if o is None else o
    spec = collision_walk_spec(G, r1, r2, m, o)
    rng = np.random.default_rng() if rng is None else rng
    if target_error is None:
        return search(spec, o, rng, backend).verdict
    return boosted_search(spec, o, rng, target_error, backend).verdict


@lru_cache(maxsize=65536)
def _collision_cached(adj_bytes, r1, r2, m, marking):
    n = r1 + r2
    adj = np.frombuffer(adj_bytes, dtype=bool).reshape(n, n)
    template = Graph(adj)
    o = QueryOracle(marking)
    spec = collision_walk_spec(template, r1, r2, m, o)
    out = search(spec, o, np.random.default_rng(0))
    return out.probability_true, spec.setup_queries + exact_detect_queries(spec)


def collision_probability(template: Graph, r1, r2, m, marking):
    """Probability that one collision-walk run answers "collision", and its cost."""
    return _collision_cached(template.adj.tobytes(), r1, r2, m, tuple(int(b) for b in marking))


# ---------------------------------------------------------------------------
# triangle checks


class TriangleChecker(Checker):
    """Is some stored edge completed to a triangle by a vertex ``k``?

    ``geometry(label, record)`` returns ``(A, B, ends)``: the two vertex
    lists of the stored bipartite graph (they coincide for a graph stored
    on a single set) and, per data slot, the positions ``(i, j)`` of its
    endpoints in ``A`` and ``B``.  For each candidate ``k`` a graph
    collision walk on the stored edges with marking "adjacent to ``k``"
    decides the candidate; candidates are searched with amplitude
    amplification over all ``n`` vertices.  The whole check is boosted to
    ``target_error``.
    """

    def __init__(self, n, oracle, geometry, sizes, symmetric, target_error=_CHECK_TARGET, m=None):
        r1, r2 = sizes
        self.m = collision_set_size(r1, r2) if m is None else int(m)
        if not 1 <= self.m <= min(r1, r2):
            raise InputError(f"collision set size m = {self.m} must lie in [1, {min(r1, r2)}]")
        self.n = n
        self.oracle = oracle
        self.geometry = geometry
        self.symmetric = symmetric
        self.target_error = target_error
        self.rounds = math.ceil(math.sqrt(n))
        empty = Graph(np.zeros((r1 + r2, r1 + r2), dtype=bool))
        _, run_cost = collision_probability(empty, r1, r2, self.m, (0,) * (r1 + r2))
        # each round flips with one collision run and uncomputes it; each try is verified
        self.raw_queries = run_cost * (self.rounds + 1) ** 2
        self.queries = boost(BoundedCheck(False, 0.0, self.raw_queries), target_error).queries

    def _template(self, A, B, ends, values):
        r1, r2 = len(A), len(B)
        adj = np.zeros((r1 + r2, r1 + r2), dtype=bool)
        for (i, j), bit in zip(ends, values):
            if bit:
                adj[i, r1 + j] = adj[r1 + j, i] = True
                if self.symmetric:
                    adj[j, r1 + i] = adj[r1 + i, j] = True
        return Graph(adj)

    def _marking(self, k, A, B):
        bits = []
        for v in list(A) + list(B):
            bits.append(0 if v == k else self.oracle.peek(pair_index(k, v, self.n)))
        return bits

    def check(self, index, label, record):
        A, B, ends = self.geometry(label, record)
        r1, r2 = len(A), len(B)
        m = self.m
        template = self._template(A, B, ends, record.values)
        hits, err = 0, 0.0
        for k in range(self.n):
            p, _ = collision_probability(template, r1, r2, m, self._marking(k, A, B))
            hits += p > 0.5
            err = max(err, min(p, 1.0 - p))
        mass = hits / self.n
        fail = 1.0 - bbht_success(mass, self.rounds) if hits else 0.0
        raw = BoundedCheck(bool(hits), min(0.5, fail + self.n * err), self.raw_queries)
        return boost(raw, self.target_error)

    def data_diagonal(self, index, label, record):
        k = record.width
        vals = np.empty(record.dim)
        for d in range(record.dim):
            bits = [(d >> (k - 1 - j)) & 1 for j in range(k)]
            bits = [b if s is not None else 0 for b, s in zip(bits, record.slots)]
            vals[d] = self.check(index, label, BitRecord(record.slots, bits)).value
        return vals


def _pairs_of(R):
    return [(i, j) for i in range(len(R)) for j in range(i + 1, len(R))]


def _triangle_edge_pairs(oracle, n):
    """Vertex pairs lying on some triangle (compile-time truth for contracts)."""
    x = [oracle.peek(i) for i in range(n * (n - 1) // 2)]
    adj = Graph.from_bits(n, x).adj
    out = set()
    for a in range(n):
        for b in range(a + 1, n):
            if adj[a, b] and (adj[a] & adj[b]).any():
                out.add((a, b))
    return out


# ---------------------------------------------------------------------------
# triangle walks


def mss_spec(n, r, oracle, target_error=_CHECK_TARGET, m=None) -> WalkLevelSpec:
    """Walk on ``J(n, r)`` storing the induced subgraph ``G_R``.

    A set is marked when it contains two vertices of a triangle, i.e. an
    edge of ``G_R`` lies on a triangle.
    """
    chain = johnson_chain(n, r)
    records = tuple(
        BitRecord.read([pair_index(R[i], R[j], n) for i, j in _pairs_of(R)], oracle, label=R)
        for R in chain.states
    )
    ends = _pairs_of(range(r))

    def geometry(label, record):
        return label, label, ends

    checker = TriangleChecker(n, oracle, geometry, (r, r), True, target_error, m)
    eps = r * (r - 1) / (n * (n - 1))
    return WalkLevelSpec(chain, records, checker, eps, name="mss",
                         meta={"n": n, "r": r, "fresh_bits": "k-to-set adjacency",
                               "stored_bits": "edges inside the set"})


def asymptotic_budget_3527(n, r, s):
    """Truncation budget ``7 s r + 100 log n`` used in the asymptotic analysis."""
    return math.ceil(7 * float(s) * r + 100 * math.log(n))


def _slot_relabel(n, r, inner_states):
    index = {T: i for i, T in enumerate(inner_states)}
    pairs = _pairs_of(range(r))
    pair_pos = {p: i for i, p in enumerate(pairs)}

    def relabel(R, R2):
        pos = {}
        gone = [v for v in R if v not in R2]
        came = [v for v in R2 if v not in R]
        where = {v: i for i, v in enumerate(R2)}
        for i, v in enumerate(R):
            pos[i] = where[came[0]] if gone and v == gone[0] else where[v]
        out = np.empty(len(inner_states), dtype=np.int64)
        for w, T in enumerate(inner_states):
            mapped = []
            for p in T:
                a, b = pairs[p]
                a2, b2 = sorted((pos[a], pos[b]))
                mapped.append(pair_pos[(a2, b2)])
            out[w] = index[tuple(sorted(mapped))]
        return out

    return relabel


def nested_3527_spec(n, params: TriangleParams, oracle) -> WalkLevelSpec:
    """Outer walk on ``J(n, r)``; inner walk on ``t``-subsets of the set's vertex pairs.

    The inner walk stores ``G_R`` restricted to its subset ``T`` of pairs
    and is marked when a stored edge lies on a triangle.  Outer data
    updates move unchanged pairs for free and recompute the pairs touching
    the swapped vertex, truncated at ``ceil(markov_k * mean cost)``.
    """
    r = params.r
    params.check(n)
    P = comb(r, 2)
    t = params.inner_size()
    inner_chain = single_state_chain(tuple(range(P))) if t == P else johnson_chain(P, t)
    slot_pairs = _pairs_of(range(r))
    tri_pairs = _triangle_edge_pairs(oracle, n)
    eps_inner = t / P
    eps_outer = r * (r - 1) / (n * (n - 1))
    # cost of refreshing the swapped vertex: 2 per stored pair touching it
    touching = r - 1
    trunc = TruncationInstance(
        tuple((math.sqrt(p), identity(RegisterLayout([("t", 1)])), 2 * d) for d, p in _hypergeom(P, touching, t)), 0)
    q = params.budget if params.budget is not None else markov_budget(trunc, params.markov_k)[0]

    def geometry(label, record):
        R, T = label
        return R, R, [slot_pairs[p] for p in T]

    def inner(R):
        records = tuple(
            BitRecord.read([pair_index(R[slot_pairs[p][0]], R[slot_pairs[p][1]], n) for p in T],
                           oracle, label=(R, T))
            for T in inner_chain.states
        )
        checker = TriangleChecker(n, oracle, lambda lab, rec: geometry((R, lab), rec), (r, r), True,
                                  m=params.m)
        return WalkLevelSpec(inner_chain, records, checker, eps_inner, name="3527-inner")

    def marked(R):
        return any((R[i], R[j]) in tri_pairs for i, j in slot_pairs)

    outer = OuterLevel(johnson_chain(n, r), eps_outer, marked=marked,
                       relabel=_slot_relabel(n, r, inner_chain.states), budget=q, name="3527-outer")
    spec = compose_two_level(outer, inner)
    spec.meta.update({"n": n, "r": r, "s": str(params.s), "t": t, "budget": q,
                      "fresh_bits": "k-to-set adjacency", "stored_bits": "sampled pairs inside the set"})
    return spec


def _hypergeom(N, K, t):
    out = []
    for d in range(0, min(K, t) + 1):
        p = comb(K, d) * comb(N - K, t - d) / comb(N, t)
        if p > 0:
            out.append((d, p))
    return out


def nested_97_spec(n, params: TriangleParams, oracle) -> WalkLevelSpec:
    """Outer walk on ``J(n, r1)``, inner walk on ``J(n, r2)`` storing ``G_{R1,R2}``.

    ``R1`` is marked when it contains a triangle vertex; ``R2`` (under
    ``R1``) when a stored cross edge lies on a triangle.
    """
    r1, r2 = params.r1, params.r2
    if r2 >= n:
        raise InputError("r2 must be smaller than n")
    x = [oracle.peek(i) for i in range(n * (n - 1) // 2)]
    adj = Graph.from_bits(n, x).adj
    tri_vertices = {v for v in range(n) if any(adj[v, a] and adj[v, b] and adj[a, b]
                                               for a in range(n) for b in range(a + 1, n))}
    outer_chain = johnson_chain(n, r1)
    inner_chain = johnson_chain(n, r2)
    eps1 = 1 - comb(n - 3, r1) / comb(n, r1)
    eps2 = 1 - comb(n - 2, r2) / comb(n, r2)
    ends = [(i, j) for i in range(r1) for j in range(r2)]

    def inner(R1):
        records = tuple(
            BitRecord.read([None if R1[i] == R2[j] else pair_index(R1[i], R2[j], n) for i, j in ends],
                           oracle, label=(R1, R2))
            for R2 in inner_chain.states
        )
        checker = TriangleChecker(n, oracle, lambda lab, rec: (R1, lab, ends), (r1, r2), False,
                                  m=params.m)
        return WalkLevelSpec(inner_chain, records, checker, eps2, name="97-inner")

    outer = OuterLevel(outer_chain, eps1, marked=lambda R1: any(v in tri_vertices for v in R1),
                       name="97-outer")
    spec = compose_two_level(outer, inner)
    spec.meta.update({"n": n, "r1": r1, "r2": r2, "m": params.m or collision_set_size(r1, r2),
                      "fresh_bits": "k-to-set adjacency", "stored_bits": "cross edges R1 x R2"})
    return spec


# ---------------------------------------------------------------------------
# runners


@dataclass
class RunResult:
    """One run of a walk algorithm."""

    verdict: bool
    probability_true: float
    queries: int
    setup_queries: int
    update_queries: int
    check_queries: int
    meta: dict = field(default_factory=dict)


def run_walk(spec: WalkLevelSpec, oracle, rng=None, target_error=None, backend="exact") -> RunResult:
    """Search (optionally boosted) and collect the query accounting."""
    rng = np.random.default_rng() if rng is None else rng
    start = oracle.count
    if target_error is None:
        out = search(spec, oracle, rng, backend)
    else:
        out = boosted_search(spec, oracle, rng, target_error, backend)
    meta = {k: v for k, v in spec.meta.items() if k not in ("inner", "marked")}
    return RunResult(out.verdict, out.probability_true, oracle.count - start, spec.setup_queries,
                     spec.update_queries, spec.check_queries, meta)


def _oracle_for(G, o):
    if o is None:
        return QueryOracle(G.bits)
    if len(o) != G.n * (G.n - 1) // 2:
        raise InputError("oracle length does not match the graph's pair count")
    return o


def triangle_mss(G: Graph, r: int, o=None, rng=None, target_error=None, backend="exact", m=None) -> bool:
    """Single-level triangle walk on ``J(n, r)``."""
    o = _oracle_for(G, o)
    TriangleParams(r=r).check(G.n)
    return run_walk(mss_spec(G.n, r, o, m=m), o, rng, target_error, backend).verdict


def triangle_nested_3527(G: Graph, p: TriangleParams, o=None, rng=None, target_error=None) -> bool:
    """Nested walk with a sparsified inner data structure."""
    o = _oracle_for(G, o)
    return run_walk(nested_3527_spec(G.n, p, o), o, rng, target_error).verdict


def triangle_nested_97(G: Graph, p: TriangleParams, o=None, rng=None, target_error=None) -> bool:
    """Nested walk over two vertex sets."""
    o = _oracle_for(G, o)
    return run_walk(nested_97_spec(G.n, p, o), o, rng, target_error).verdict
