"""Walks whose data are the initial states of other walks.

An outer walk stores, for each of its states ``u``, the inner walk's start
state ``sum_w sqrt(pi'_w)|w>|D^u(w)>``.  Checking ``u`` is then a reflection
about that stored state, implemented by running inner detection; the inner
setup is paid once, inside the outer setup.

This module also holds the truncated controlled unitary used when an
update is cheap on average but expensive in the worst case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import hypergeom, unitary_group

from .data import NestedRecord, BitRecord
from .exceptions import ContractError, InputError
from .hilbert import LinearOp, RegisterLayout, StateVector, controlled
from .markov import MarkovChain, johnson_chain
from .oracle import BoundedCheck, boost
from .walk import Checker, PredicateChecker, WalkLevelSpec, detect_summary, walk_operators

__all__ = [
    "OuterLevel",
    "NestedChecker",
    "NestedWalkSpec",
    "TruncationInstance",
    "compose_two_level",
    "compose_k_level",
    "inner_boost_target",
    "truncated_controlled",
    "markov_budget",
    "truncation_overlap",
    "random_truncation_instance",
    "degree_instance",
    "witness_violations",
    "update_deviation",
    "toy_three_level",
]


@dataclass(frozen=True)
class OuterLevel:
    """Everything an outer level needs except its data and check.

    ``marked(label)`` is the level's own definition of a marked state; it
    is only used to verify that the inner walks witness it.  ``relabel``
    maps inner states when the outer state moves (see
    :class:`~nestedwalk.data.NestedRecord`); ``budget`` truncates data
    updates whose branch cost exceeds it.
    """

    chain: MarkovChain
    epsilon: float
    marked: Optional[Callable] = None
    relabel: Optional[Callable] = None
    budget: Optional[int] = None
    name: str = "outer"


class NestedChecker(Checker):
    """Reflection about the stored inner start state, via inner detection.

    For outer state ``u`` the inner walk ``inner[u]`` is run with the exact
    detection map; its residual error is then reduced by majority voting to
    ``target_error``.
    """

    def __init__(self, inner_specs: Sequence[WalkLevelSpec], target_error: float):
        self.inner = tuple(inner_specs)
        self.target_error = float(target_error)
        self._cache = {}
        self.queries = max(self._boosted(i).queries for i in range(len(self.inner)))

    def _boosted(self, i):
        if i not in self._cache:
            verdict, a, _, q = detect_summary(self.inner[i])
            self._cache[i] = boost(BoundedCheck(verdict, (1.0 - a) / 2.0, q), self.target_error)
        return self._cache[i]

    def check(self, index, label, record):
        return self._boosted(index)

    def operator_on_data(self, index, label, record):
        v = record.vector()
        lam = self.check(index, label, record).value
        return np.eye(v.size, dtype=complex) - (1.0 - lam) * np.outer(v, v.conj())


def inner_boost_target(outer_epsilon):
    """Per-call error ``1/(64 n)`` for ``n = ceil(1/√ε)`` outer checks."""
    n_chk = math.ceil(1.0 / math.sqrt(outer_epsilon) - 1e-12)
    return 1.0 / (64.0 * n_chk)


def compose_two_level(outer: OuterLevel, inner_family: Callable, target_error=None,
                      verify=True) -> WalkLevelSpec:
    """Outer walk whose data are the inner walks' start states.

    ``inner_family(label)`` returns the inner :class:`WalkLevelSpec` for
    outer state ``label``.  With ``verify`` set, the outer ``marked``
    predicate (when given) must coincide with non-emptiness of the inner
    marked sets, or :class:`ContractError` is raised.
    """
    labels = outer.chain.states
    inner = [inner_family(u) for u in labels]
    shape = inner[0].records[0].shape_key()
    for spec in inner:
        if spec.chain.size != inner[0].chain.size or spec.records[0].shape_key() != shape:
            raise ContractError("inner walks must share their state space and data shape")
    records = tuple(
        NestedRecord(spec.chain, spec.records, label=u, relabel=outer.relabel)
        for u, spec in zip(labels, inner)
    )
    target = inner_boost_target(outer.epsilon) if target_error is None else target_error
    spec = WalkLevelSpec(
        outer.chain, records, NestedChecker(inner, target), outer.epsilon,
        name=outer.name, budget=outer.budget,
        meta={"inner": tuple(inner), "marked": outer.marked, "boost_target": target},
    )
    if verify and outer.marked is not None:
        bad = witness_violations(spec, recursive=False)
        if bad:
            raise ContractError(f"{outer.name}: inner marked sets do not witness states {bad[:5]}")
    return spec


@dataclass(frozen=True)
class NestedWalkSpec:
    """``k`` levels described by prefix-indexed builders.

    ``levels[i](prefix)`` returns an :class:`OuterLevel` for ``i < k - 1``
    and a complete :class:`WalkLevelSpec` for the innermost level; ``prefix``
    is the tuple of enclosing state labels.
    """

    levels: tuple
    target_error: Optional[float] = None

    @property
    def depth(self):
        return len(self.levels)


def compose_k_level(spec: NestedWalkSpec, prefix=()) -> WalkLevelSpec:
    """Right fold of :func:`compose_two_level` over the levels."""
    if spec.depth < 1:
        raise InputError("a nested walk needs at least one level")
    return _fold(spec.levels, prefix, spec.target_error)


def _fold(levels, prefix, target):
    if len(levels) == 1:
        return levels[0](prefix)
    outer = levels[0](prefix)
    return compose_two_level(outer, lambda u: _fold(levels[1:], prefix + (u,), target), target)


# ---------------------------------------------------------------------------
# contract checks


def witness_violations(spec: WalkLevelSpec, recursive=True):
    """Outer states whose declared markedness disagrees with their inner walk.

    Returns a list of ``(level_name, label)`` pairs; empty means consistent.
    """
    out = []
    inner = spec.meta.get("inner")
    marked = spec.meta.get("marked")
    if inner is None:
        return out
    for u, sub in zip(spec.chain.states, inner):
        witnessed = bool(sub.marked())
        if marked is not None and bool(marked(u)) != witnessed:
            out.append((spec.name, u))
        if recursive:
            out.extend(witness_violations(sub, True))
    return out


def update_deviation(spec: WalkLevelSpec, recursive=True):
    """Largest amplitude error of ``U_D |u,v,D(u)> = |u,v,D(v)>`` over all moves.

    All moves are checked in one application on a superposition with
    distinct weights.
    """
    k = spec.chain.size + 1
    d = spec.data_dim
    moves = sorted(spec.transitions)
    rng = np.random.default_rng(len(moves))
    w = rng.uniform(0.5, 1.5, len(moves)) * np.exp(2j * np.pi * rng.random(len(moves)))
    w /= np.linalg.norm(w)
    x = np.zeros(spec.layout.total, dtype=complex)
    want = np.zeros_like(x)
    for c, (i, j) in zip(w, moves):
        off = ((i + 1) * k + (j + 1)) * d
        x[off:off + d] += c * spec.records[i].vector()
        want[off:off + d] += c * spec.records[j].vector()
    got = walk_operators(spec).U_D(x)
    dev = float(np.abs(got - want).max())
    if recursive:
        for sub in spec.meta.get("inner", ()):
            dev = max(dev, update_deviation(sub, True))
    return dev


# ---------------------------------------------------------------------------
# averaging costs


@dataclass(frozen=True)
class TruncationInstance:
    """Branches ``(alpha_i, U_i, q_i)`` of a controlled unitary and a budget ``q``."""

    branches: tuple
    budget: int = 0

    def __post_init__(self):
        if not self.branches:
            raise InputError("a truncation instance needs at least one branch")
        total = sum(abs(a) ** 2 for a, _, _ in self.branches)
        if abs(total - 1.0) > 1e-9:
            raise InputError(f"branch weights sum to {total}, not 1")
        lay = self.branches[0][1].layout
        if any(op.layout.total != lay.total for _, op, _ in self.branches):
            raise InputError("branch unitaries must act on one space")
        if any(q < 0 for _, _, q in self.branches):
            raise InputError("branch costs must be non-negative")

    @property
    def weights(self):
        return np.array([abs(a) ** 2 for a, _, _ in self.branches])

    @property
    def costs(self):
        return np.array([q for _, _, q in self.branches])

    def with_budget(self, q):
        return TruncationInstance(self.branches, int(q))


def truncated_controlled(t: TruncationInstance):
    """``Ũ``: ``U_i`` on branches with ``q_i <= q`` and the identity elsewhere.

    Returns ``(op, predicted_error)`` with ``predicted_error`` the weight of
    the dropped branches.  The operator costs at most ``q`` queries.
    """
    target = t.branches[0][1].layout
    layout = RegisterLayout([("i", len(t.branches)), ("target", target)])
    blocks = {}
    kept_cost = 0
    err = 0.0
    for i, (a, op, q) in enumerate(t.branches):
        if q <= t.budget:
            blocks[i] = op
            kept_cost = max(kept_cost, q)
        else:
            blocks[i] = None
            err += abs(a) ** 2
    ctl = controlled(blocks, "i", layout, name="truncated")
    ctl.queries = kept_cost
    return ctl, float(err)


def full_controlled(t: TruncationInstance):
    """The untruncated ``U = sum_i |i><i| ⊗ U_i``."""
    target = t.branches[0][1].layout
    layout = RegisterLayout([("i", len(t.branches)), ("target", target)])
    op = controlled({i: b[1] for i, b in enumerate(t.branches)}, "i", layout, name="controlled")
    op.queries = int(t.costs.max())
    return op


def markov_budget(t: TruncationInstance, k: float):
    """Budget ``q = ceil(k * mean cost)``; the dropped weight is then below ``1/k``."""
    if k < 1:
        raise InputError("the Markov multiplier must be at least 1")
    mean = float(t.weights @ t.costs)
    q = math.ceil(k * mean - 1e-12)
    return q, 1.0 / k


def truncation_overlap(t: TruncationInstance, branch_states):
    """``Re <U s | Ũ s>`` for ``s = sum_i alpha_i |i>|s_i>``.

    Returns ``(overlap, predicted_error)``.
    """
    op_t, err = truncated_controlled(t)
    op_u = full_controlled(t)
    s = np.concatenate([a * np.asarray(v, dtype=complex) for (a, _, _), v in zip(t.branches, branch_states)])
    s = StateVector(op_t.layout, s)
    return float(np.real(np.vdot(op_u(s.amplitudes), op_t(s.amplitudes)))), err


def _haar_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_truncation_instance(rng, max_branches=16, dim=4, max_cost=20):
    """Random weights, Haar-random branch unitaries and states, random budget.

    Returns ``(instance, branch_states)``.
    """
    m = int(rng.integers(1, max_branches + 1))
    alphas = _haar_state(rng, m)
    lay = RegisterLayout([("t", dim)])
    branches = []
    for a in alphas:
        U = unitary_group.rvs(dim, random_state=rng)
        op = LinearOp.from_matrix(lay, U)
        branches.append((complex(a), op, int(rng.integers(0, max_cost + 1))))
    q = int(rng.integers(0, max_cost + 1))
    states = [_haar_state(rng, dim) for _ in range(m)]
    return TruncationInstance(tuple(branches), q), states


def degree_instance(n_pairs, n_incident, sample_size, rng=None, dim=2):
    """Degree of a fixed vertex in a uniformly random edge sample.

    ``n_pairs`` potential edges, ``n_incident`` of which touch the vertex,
    ``sample_size`` of them kept.  Branch ``i`` is "degree i" with weight
    equal to the hypergeometric probability and cost ``2 i`` (uncompute and
    recompute each incident bit).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    lay = RegisterLayout([("t", dim)])
    dist = hypergeom(n_pairs, n_incident, sample_size)
    branches = []
    for i in range(0, min(n_incident, sample_size) + 1):
        p = float(dist.pmf(i))
        if p <= 0:
            continue
        op = LinearOp.from_matrix(lay, unitary_group.rvs(dim, random_state=rng))
        branches.append((math.sqrt(p), op, 2 * i))
    norm = math.sqrt(sum(abs(a) ** 2 for a, _, _ in branches))
    branches = [(a / norm, op, q) for a, op, q in branches]
    return TruncationInstance(tuple(branches), 0)


# ---------------------------------------------------------------------------
# a three-level synthetic walk


def _toy_index_a(u, v):
    return (u + v) % 3


def _toy_index_b(v, w):
    return 3 + (v + w) % 3


def toy_three_level(oracle, size=4):
    """Three nested walks on ``J(size, 1)`` over a 6-bit input.

    The innermost state ``w`` (under prefix ``(u, v)``) stores the bits
    ``x[a(u,v)]`` and ``x[b(v,w)]`` and is marked when both are 1; the
    outer levels are marked exactly when some extension is.  Returns a
    :class:`NestedWalkSpec`.
    """
    if len(oracle) != 6:
        raise InputError("the three-level toy reads a 6-bit input")
    chain = johnson_chain(size, 1)
    x = [oracle.peek(i) for i in range(6)]

    def label(s):
        return s[0]

    def any_w(v):
        return any(x[_toy_index_b(v, w)] for w in range(size))

    def level1(prefix):
        return OuterLevel(chain, 1.0 / size, name="level1",
                          marked=lambda s: any(x[_toy_index_a(label(s), v)] and any_w(v) for v in range(size)))

    def level2(prefix):
        u = label(prefix[0])
        return OuterLevel(chain, 1.0 / size, name="level2",
                          marked=lambda s: bool(x[_toy_index_a(u, label(s))] and any_w(label(s))))

    def level3(prefix):
        u, v = label(prefix[0]), label(prefix[1])
        records = tuple(
            BitRecord.read((_toy_index_a(u, v), _toy_index_b(v, label(s))), oracle, label=s)
            for s in chain.states
        )
        checker = PredicateChecker(lambda s, rec: rec.values[0] == 1 and rec.values[1] == 1, name="both")
        return WalkLevelSpec(chain, records, checker, 1.0 / size, name="level3")

    return NestedWalkSpec((level1, level2, level3))
