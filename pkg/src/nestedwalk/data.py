"""Data attached to walk states.

Three kinds of record live in a walk's ``D`` register:

* :class:`BitRecord` holds copies of input bits, one slot per bit of ``x``
  (or a constant-zero slot that needs no query).  Its state is a basis
  vector.
* :class:`VectorRecord` holds an arbitrary fixed state; used for synthetic
  walks whose data is genuinely quantum.
* :class:`NestedRecord` holds an inner walk's initial state
  ``sum_w sqrt(pi'_w) |w>|D(w)>``, recursively.

A :func:`transition` between two records of the same shape is the unitary
used by the data update ``U_D``.  Between bit records it is a permutation
of basis states: slots holding the same input bit are moved for free and
every other slot is uncomputed and recomputed from the oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .exceptions import ContractError, InputError
from .hilbert import RegisterLayout

__all__ = [
    "BitRecord",
    "VectorRecord",
    "NestedRecord",
    "Transition",
    "transition",
    "transition_unitary",
]


class BitRecord:
    """Copies of the input bits ``x[slots[0]], x[slots[1]], ...``.

    ``values`` are read at compile time (uncounted); building the record in
    a circuit costs one query per non-constant slot.
    """

    __slots__ = ("slots", "values", "label")

    def __init__(self, slots, values, label=None):
        self.slots = tuple(None if s is None else int(s) for s in slots)
        self.values = tuple(int(v) for v in values)
        if len(self.slots) != len(self.values):
            raise InputError("slots and values differ in length")
        for s, v in zip(self.slots, self.values):
            if s is None and v != 0:
                raise InputError("constant slots must hold 0")
        self.label = label

    @classmethod
    def read(cls, slots, oracle, label=None):
        slots = tuple(slots)
        return cls(slots, [0 if s is None else oracle.peek(s) for s in slots], label)

    @property
    def width(self):
        return len(self.slots)

    @property
    def dim(self):
        return 1 << self.width

    def layout(self, depth=0):
        return RegisterLayout([("D" + "'" * depth, self.dim)])

    @property
    def index(self):
        """Basis index; slot 0 is the most significant bit."""
        idx = 0
        for v in self.values:
            idx = (idx << 1) | v
        return idx

    def vector(self):
        v = np.zeros(self.dim, dtype=complex)
        v[self.index] = 1.0
        return v

    @property
    def setup_queries(self):
        return sum(s is not None for s in self.slots)

    def shape_key(self):
        return ("bits", self.width)


class VectorRecord:
    """Fixed normalised state with a declared per-transition query cost."""

    __slots__ = ("state", "queries", "label")

    def __init__(self, state, queries=0, label=None):
        v = np.asarray(state, dtype=complex).ravel()
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise InputError("data state must be normalised")
        self.state = v
        self.queries = int(queries)
        self.label = label

    @property
    def dim(self):
        return self.state.size

    def layout(self, depth=0):
        return RegisterLayout([("D" + "'" * depth, self.dim)])

    def vector(self):
        return self.state.copy()

    @property
    def setup_queries(self):
        return self.queries

    def shape_key(self):
        return ("vector", self.dim)


class NestedRecord:
    """Initial state of an inner walk: ``sum_w sqrt(pi_w) |w+1>_{L'} |D(w)>``.

    Index 0 of the inner label register is the empty marker, as for every
    walk register in this package.  ``relabel(a, b)`` optionally returns
    the permutation of inner states induced by an outer move from state
    label ``a`` to ``b``; by default inner labels are unchanged.
    """

    __slots__ = ("chain", "children", "label", "relabel", "__dict__")

    def __init__(self, chain, children, label=None, relabel: Optional[Callable] = None):
        children = tuple(children)
        if len(children) != chain.size:
            raise InputError("one child record is needed per inner state")
        key = children[0].shape_key()
        if any(c.shape_key() != key for c in children):
            raise ContractError("inner records must share one shape")
        self.chain = chain
        self.children = children
        self.label = label
        self.relabel = relabel

    @property
    def child_dim(self):
        return self.children[0].dim

    @property
    def dim(self):
        return (self.chain.size + 1) * self.child_dim

    def layout(self, depth=0):
        ticks = "'" * (depth + 1)
        return RegisterLayout([
            ("L" + ticks, self.chain.size + 1),
            ("D" + ticks, self.children[0].layout(depth + 1)),
        ])

    @cached_property
    def _vector(self):
        v = np.zeros(self.dim, dtype=complex)
        cd = self.child_dim
        amp = np.sqrt(self.chain.pi)
        for w, child in enumerate(self.children):
            v[(w + 1) * cd:(w + 2) * cd] = amp[w] * child.vector()
        v.setflags(write=False)
        return v

    def vector(self):
        return self._vector.copy()

    @property
    def setup_queries(self):
        return max(c.setup_queries for c in self.children)

    def shape_key(self):
        return ("nested", self.chain.size, self.children[0].shape_key())


@dataclass
class Transition:
    """Data update between two records.

    ``perm`` (basis permutation, ``new[perm[i]] = old[i]``) or ``matrix``
    (dense unitary) is set.  ``queries`` is the oracle cost of the circuit
    and ``truncated`` the number of branches replaced by a relabel only.
    """

    perm: Optional[np.ndarray]
    matrix: Optional[np.ndarray]
    queries: int
    truncated: int = 0
    branch_costs: tuple = ()


def _bit_plan(a: BitRecord, b: BitRecord):
    """Slot correspondence and per-slot query cost from ``a`` to ``b``."""
    if a.width != b.width:
        raise ContractError("bit records of different widths")
    src = [None] * b.width
    used = [False] * a.width
    where = {}
    for i, s in enumerate(a.slots):
        if s is not None:
            where.setdefault(s, []).append(i)
    for j, s in enumerate(b.slots):
        if s is not None and where.get(s):
            i = where[s].pop(0)
            if a.values[i] != b.values[j]:
                raise ContractError(f"input bit {s} is stored with two different values")
            src[j] = i
            used[i] = True
    # constant slots pair up for free
    free_a = [i for i in range(a.width) if not used[i] and a.slots[i] is None]
    for j, s in enumerate(b.slots):
        if s is None and src[j] is None and free_a:
            i = free_a.pop(0)
            src[j] = i
            used[i] = True
    rest_a = [i for i in range(a.width) if not used[i]]
    cost = 0
    for j in range(b.width):
        if src[j] is None:
            i = rest_a.pop(0)
            src[j] = i
            cost += (a.slots[i] is not None) + (b.slots[j] is not None)
    return src, cost


def _bit_perm(a: BitRecord, b: BitRecord, src, apply_xor=True):
    k = a.width
    old = np.arange(1 << k, dtype=np.int64)
    new = np.zeros_like(old)
    for j in range(k):
        i = src[j]
        bit = (old >> (k - 1 - i)) & 1
        if apply_xor and a.slots[i] != b.slots[j]:
            bit = bit ^ (a.values[i] ^ b.values[j])
        new |= bit << (k - 1 - j)
    return new


def transition_unitary(a_vec, b_vec):
    """Unitary carrying unit vector ``a_vec`` onto ``b_vec``.

    Both are completed to orthonormal bases by QR; the phase of the first
    column is fixed so that the image of ``a_vec`` is exactly ``b_vec``.
    """
    d = a_vec.size

    def basis(v):
        M = np.column_stack([v, np.eye(d, dtype=complex)])
        Q, R = np.linalg.qr(M)
        Q[:, 0] *= R[0, 0] / abs(R[0, 0])
        return Q

    return basis(b_vec) @ basis(a_vec).conj().T


def transition(a, b, budget=None) -> Transition:
    """Data update carrying record ``a`` to record ``b``.

    With ``budget`` set, inner branches of a nested record whose update
    would cost more than ``budget`` queries are only relabelled (the
    truncated controlled unitary); ties at the budget are implemented.
    """
    if a.shape_key() != b.shape_key():
        raise ContractError(f"records of different shapes: {a.shape_key()} vs {b.shape_key()}")
    if isinstance(a, BitRecord):
        src, cost = _bit_plan(a, b)
        return Transition(_bit_perm(a, b, src), None, cost)
    if isinstance(a, VectorRecord):
        return Transition(None, transition_unitary(a.state, b.state), max(a.queries, b.queries))
    return _nested_transition(a, b, budget)


def _nested_transition(a: NestedRecord, b: NestedRecord, budget):
    k = a.chain.size
    cd = a.child_dim
    mapping = np.arange(k)
    if a.relabel is not None:
        mapping = np.asarray(a.relabel(a.label, b.label), dtype=np.int64)
        if sorted(mapping.tolist()) != list(range(k)):
            raise ContractError("inner relabelling is not a permutation")
    perm = np.arange(a.dim, dtype=np.int64)
    cost = 0
    truncated = 0
    costs = []
    for w in range(k):
        w2 = int(mapping[w])
        ca, cb = a.children[w], b.children[w2]
        sub = transition(ca, cb, budget)
        if sub.perm is None:
            raise ContractError("nested records must hold classical data")
        costs.append(sub.queries)
        if budget is not None and sub.queries > budget:
            # relabel only: move slots, skip every oracle call
            truncated += 1
            src, _ = _bit_plan(ca, cb) if isinstance(ca, BitRecord) else (None, 0)
            if src is None:
                raise ContractError("truncation is supported one level above bit records")
            sub_perm = _bit_perm(ca, cb, src, apply_xor=False)
        else:
            sub_perm = sub.perm
            cost = max(cost, sub.queries)
        perm[(w + 1) * cd:(w + 2) * cd] = (w2 + 1) * cd + sub_perm
    return Transition(perm, None, cost, truncated, tuple(costs))
