"""Quantum walk search with data: setup, update, the walk operator, detection.

Register conventions
--------------------
A walk over a chain with ``k`` states acts on ``L ⊗ R ⊗ D`` where ``L`` and
``R`` have dimension ``k + 1``.  Basis index ``0`` of ``L`` and ``R`` is an
empty marker and state ``i`` of the chain sits at index ``i + 1``, so the
walk's start state ``|u>|0>|D(u)>`` has ``R`` empty.

Detection backends
------------------
``"exact"``
    Applies the ideal detection map ``|π> -> ±|π>`` directly (a reflection
    about the computed start state, damped by the checker's residual
    error).  Query costs are charged from the walk's declared schedule.
``"pe"``
    Phase estimation on ``G = Ref_π · Check`` where ``Ref_π`` is itself
    built from phase estimation on the walk operator.  Only the branch in
    which every estimation ancilla returns to its initial state is kept;
    that branch is computed exactly as a polynomial in the operator (see
    :func:`pe_reflection`).  Flat walks only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import config
from .data import BitRecord, NestedRecord, VectorRecord, transition
from .exceptions import BudgetError, ContractError, InputError
from .hilbert import LinearOp, RegisterLayout, StateVector, reflection_about
from .markov import MarkovChain
from .oracle import BoundedCheck

__all__ = [
    "WalkLevelSpec",
    "Checker",
    "PredicateChecker",
    "DetectOutcome",
    "SearchOutcome",
    "AAOutcome",
    "WalkOperators",
    "build_setup_state",
    "start_vector",
    "apply_update",
    "walk_operators",
    "szegedy_step",
    "detect",
    "detect_summary",
    "search",
    "boosted_search",
    "amplitude_amplification",
    "grover_iterations",
    "grover_success",
    "bbht_success",
    "pe_reflection",
    "pe_reflection_circuit",
    "pe_precision",
]


class Checker:
    """Phase-flip check of a walk state against its data.

    Subclasses return a :class:`~nestedwalk.oracle.BoundedCheck` for a
    state index and its data record.  ``queries`` is the declared cost of
    one application.
    """

    queries: int = 0

    def check(self, index, label, record) -> BoundedCheck:
        raise NotImplementedError

    def data_diagonal(self, index, label, record):
        """Check amplitudes over every basis state of ``D`` (flat walks only)."""
        raise NotImplementedError(f"{type(self).__name__} has no basis-diagonal form")

    def operator_on_data(self, index, label, record):
        """Block of the check acting on ``D`` when ``L`` holds ``index``."""
        return np.diag(self.data_diagonal(index, label, record))


class PredicateChecker(Checker):
    """Check defined by a function of the state label and its data.

    ``predicate(label, record)`` returns a bool (exact check) or a
    :class:`BoundedCheck`.  For bit records the predicate is also evaluated
    on every other bit pattern so the check can act on arbitrary data.
    """

    def __init__(self, predicate: Callable, queries=0, name="predicate"):
        self.predicate = predicate
        self.queries = int(queries)
        self.name = name

    def check(self, index, label, record):
        out = self.predicate(label, record)
        if isinstance(out, BoundedCheck):
            return out
        return BoundedCheck(bool(out), 0.0, self.queries)

    def data_diagonal(self, index, label, record):
        if isinstance(record, BitRecord):
            k = record.width
            vals = np.empty(record.dim)
            for d in range(record.dim):
                bits = [(d >> (k - 1 - j)) & 1 for j in range(k)]
                # constant slots are never set by a valid circuit; treat them as stored
                bits = [b if s is not None else 0 for b, s in zip(bits, record.slots)]
                vals[d] = self.check(index, label, BitRecord(record.slots, bits, record.label)).value
            return vals
        if isinstance(record, VectorRecord):
            return np.full(record.dim, self.check(index, label, record).value)
        raise ContractError("predicate checks act on flat data only")


@dataclass(frozen=True, eq=False)
class WalkLevelSpec:
    """One level of a (possibly nested) walk.

    Attributes
    ----------
    chain : MarkovChain
    records : tuple
        Data record of every chain state (index-aligned with ``chain.states``).
    checker : Checker
    epsilon : float
        Declared lower bound on the stationary mass of the marked set when
        it is non-empty.
    budget : int or None
        Per-branch query budget for truncated data updates.
    """

    chain: MarkovChain
    records: tuple
    checker: Checker
    epsilon: float
    name: str = "walk"
    budget: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise InputError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if len(self.records) != self.chain.size:
            raise InputError("one data record is needed per chain state")
        key = self.records[0].shape_key()
        if any(r.shape_key() != key for r in self.records):
            raise ContractError("data records must share one shape")

    @property
    def delta(self):
        return self.chain.delta

    @property
    def data_dim(self):
        return self.records[0].dim

    @property
    def nested(self):
        return isinstance(self.records[0], NestedRecord)

    @cached_property
    def layout(self):
        k = self.chain.size + 1
        return RegisterLayout([("L", k), ("R", k), ("D", self.records[0].layout())])

    @cached_property
    def compact_layout(self):
        return RegisterLayout([("L", self.chain.size + 1), ("D", self.records[0].layout())])

    @property
    def setup_queries(self):
        """Queries to prepare every record in superposition (max over branches)."""
        return max(r.setup_queries for r in self.records)

    @cached_property
    def transitions(self):
        """Data transitions for every chain move ``i -> j`` with ``P[i, j] > 0``."""
        out = {}
        for i in range(self.chain.size):
            for j in self.chain.neighbours(i):
                out[(i, int(j))] = transition(self.records[i], self.records[int(j)], self.budget)
        return out

    @cached_property
    def update_queries(self):
        """Declared cost of one ``U_D``: the most expensive move."""
        return max((t.queries for t in self.transitions.values()), default=0)

    @property
    def check_queries(self):
        return self.checker.queries

    @cached_property
    def checks(self):
        """Checker verdict for every state, with its own data."""
        labels = self.chain.states
        return tuple(self.checker.check(i, labels[i], r) for i, r in enumerate(self.records))

    def marked(self):
        """Indices of states the checker flips."""
        return [i for i, c in enumerate(self.checks) if c.value < 0]


# ---------------------------------------------------------------------------
# states and operators


def start_vector(spec: WalkLevelSpec, compact=False):
    """Amplitudes of ``sum_u sqrt(pi_u) |u>|0>|D(u)>`` (``R`` dropped if ``compact``)."""
    k = spec.chain.size + 1
    d = spec.data_dim
    rdim = 1 if compact else k
    v = np.zeros(k * rdim * d, dtype=complex)
    amp = np.sqrt(spec.chain.pi)
    for i, rec in enumerate(spec.records):
        off = (i + 1) * rdim * d
        v[off:off + d] = amp[i] * rec.vector()
    return v


def build_setup_state(spec: WalkLevelSpec, oracle=None) -> StateVector:
    """Prepare ``|π^x>``; charges the declared setup cost to ``oracle``."""
    state = StateVector(spec.layout, start_vector(spec))
    if oracle is not None:
        oracle.charge(spec.setup_queries)
    return state


def _householder_vectors(chain: MarkovChain):
    """Row ``l`` holds ``w_l = e_0 - p_l``; the null row is zero (identity)."""
    k = chain.size + 1
    Wv = np.zeros((k, k))
    sqP = chain.P.copy()
    sqP.data = np.sqrt(sqP.data)
    dense = sqP.toarray()
    for i in range(chain.size):
        Wv[i + 1, 0] = 1.0
        Wv[i + 1, 1:] = -dense[i]
    return Wv


def _make_up(layout, chain):
    k = chain.size + 1
    Wv = _householder_vectors(chain)
    norms = (Wv ** 2).sum(axis=1)
    scale = np.where(norms > 0, 2.0 / np.where(norms > 0, norms, 1.0), 0.0)

    def mv(x):
        batch = x.shape[1:]
        t = x.reshape(k, k, -1)
        coef = np.einsum("lr,lrb->lb", Wv, t) * scale[:, None]
        out = t - Wv[:, :, None] * coef[:, None, :]
        return out.reshape((layout.total,) + batch)

    return LinearOp(layout, mv, mv, 0, None, "U_P")


def _permutation_op(layout, perm, name, queries=0, oracle=None):
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)

    def fwd(x):
        out = np.empty_like(x)
        out[perm] = x
        return out

    def bwd(x):
        out = np.empty_like(x)
        out[inv] = x
        return out

    return LinearOp(layout, fwd, bwd, queries, oracle, name)


def _make_ud(spec: WalkLevelSpec, oracle=None):
    layout = spec.layout
    k = spec.chain.size + 1
    d = spec.data_dim
    trans = spec.transitions
    if all(t.perm is not None for t in trans.values()):
        perm = np.arange(layout.total, dtype=np.int64)
        for (i, j), t in trans.items():
            off = ((i + 1) * k + (j + 1)) * d
            perm[off:off + d] = off + t.perm
        return _permutation_op(layout, perm, "U_D", spec.update_queries, oracle)
    pairs = sorted(trans)
    rows = np.array([(i + 1) * k + (j + 1) for i, j in pairs], dtype=np.int64)
    mats = np.stack([trans[p].matrix for p in pairs])
    mats_h = np.conj(np.transpose(mats, (0, 2, 1)))

    def make(M):
        def mv(x):
            batch = x.shape[1:]
            t = x.reshape(k * k, d, -1)
            out = t.astype(complex, copy=True)
            out[rows] = np.einsum("pij,pjb->pib", M, t[rows])
            return out.reshape((layout.total,) + batch)
        return mv

    return LinearOp(layout, make(mats), make(mats_h), spec.update_queries, oracle, "U_D")


def _make_swap(layout, k, d):
    idx = np.arange(layout.total).reshape(k, k, d)
    perm = np.transpose(idx, (1, 0, 2)).reshape(-1)
    # perm[i] is the index that lands on i; convert to "new[perm[i]] = old[i]"
    fwd = np.empty_like(perm)
    fwd[perm] = np.arange(perm.size)
    return _permutation_op(layout, fwd, "S")


def _projector_reflection(layout, k, d, register):
    """``2 Π_{register = 0} - I`` on ``L ⊗ R ⊗ D``."""

    def mv(x):
        batch = x.shape[1:]
        t = -x.reshape(k, k, d, -1)
        if register == "R":
            t[:, 0] *= -1
        else:
            t[0] *= -1
        return t.reshape((layout.total,) + batch)

    return LinearOp(layout, mv, mv, 0, None, f"2Π[{register}=0]-I")


@dataclass(frozen=True)
class WalkOperators:
    """Compiled operators of one walk level."""

    U_P: LinearOp
    U_D: LinearOp
    V: LinearOp
    S: LinearOp
    ref_A: LinearOp
    ref_B: LinearOp
    W: LinearOp


def walk_operators(spec: WalkLevelSpec, oracle=None) -> WalkOperators:
    """Build ``U_P``, ``U_D`` and the walk operator ``W = Ref_B · Ref_A``.

    ``Ref_A`` reflects about ``span{V|u>|0>|d>}`` with ``V = U_D U_P``; it
    applies ``U_D`` twice.  ``Ref_B`` reflects about
    ``span{|p*_v>|v>|d>}`` and uses only the chain, so it is query free.
    """
    layout = spec.layout
    k = spec.chain.size + 1
    d = spec.data_dim
    up = _make_up(layout, spec.chain)
    ud = _make_ud(spec, oracle)
    V = ud @ up
    S = _make_swap(layout, k, d)
    refR = _projector_reflection(layout, k, d, "R")
    refL = _projector_reflection(layout, k, d, "L")
    ref_A = V @ refR @ V.H
    ref_B = S @ up @ S @ refL @ S @ up.H @ S
    W = ref_B @ ref_A
    return WalkOperators(up, ud, V, S, ref_A.with_oracle(oracle), ref_B.with_oracle(None, 0), W.with_oracle(oracle))


def apply_update(spec: WalkLevelSpec, oracle=None) -> LinearOp:
    """The composite ``U_D · U_P``; charges the declared update cost per application."""
    ops = walk_operators(spec, oracle)
    return ops.V


def szegedy_step(spec: WalkLevelSpec, oracle=None) -> LinearOp:
    """Walk operator ``W(P) = Ref_B · Ref_A``."""
    return walk_operators(spec, oracle).W


# ---------------------------------------------------------------------------
# detection


@dataclass(frozen=True)
class DetectOutcome:
    """Result of one detection.

    ``verdict`` is the non-emptiness of the marked set as seen by the
    checker, ``amplitude`` is ``Re<π|out>`` and ``fidelity`` is the squared
    overlap of the output with the ideal ``∓|π>``.
    """

    verdict: bool
    fidelity: float
    queries: int
    amplitude: float
    marked_mass: float
    backend: str = "exact"


def _iterations(spec):
    n_chk = math.ceil(1.0 / math.sqrt(spec.epsilon) - 1e-12)
    n_w = math.ceil(1.0 / math.sqrt(min(spec.delta, 1.0)) - 1e-12)
    return n_chk, n_w


def detection_budget(spec: WalkLevelSpec, constant=None):
    """``c0 (1/√ε)((1/√δ) U + C)``."""
    c0 = config.BUDGET_CONSTANT if constant is None else constant
    return c0 / math.sqrt(spec.epsilon) * (spec.update_queries / math.sqrt(min(spec.delta, 1.0))
                                           + spec.check_queries)


def exact_detect_queries(spec: WalkLevelSpec):
    n_chk, n_w = _iterations(spec)
    return n_chk * (n_w * 2 * spec.update_queries + spec.check_queries)


def detect_summary(spec: WalkLevelSpec):
    """Verdict, damping amplitude, marked mass and cost of exact detection.

    The damping amplitude is ``max(0, 1 - 2 n e)`` where ``n`` is the
    number of checks in the schedule and ``e`` the worst residual checker
    error; it is the overlap of the output with the ideal ``-|π>``.
    """
    checks = spec.checks
    marked = [i for i, c in enumerate(checks) if c.value < 0]
    mass = float(spec.chain.pi[marked].sum()) if marked else 0.0
    if marked and mass < spec.epsilon - 1e-12:
        raise ContractError(
            f"{spec.name}: marked mass {mass:.6g} is below the declared bound {spec.epsilon:.6g}")
    n_chk, _ = _iterations(spec)
    e_max = max(c.error for c in checks)
    a = max(0.0, 1.0 - 2.0 * n_chk * e_max) if marked else 1.0
    return bool(marked), a, mass, exact_detect_queries(spec)


def detect(spec: WalkLevelSpec, state: StateVector, oracle=None, backend="exact", check_budget=True):
    """Detection map ``|π> -> -|π>`` if the marked set is non-empty, else ``|π>``.

    Returns ``(DetectOutcome, output_state)``.  The output of the ``pe``
    backend is the retained (ancilla-restored) branch and may be slightly
    subnormalised.
    """
    if state.layout != spec.layout:
        raise InputError("state does not live on the walk's layout")
    if abs(state.norm() - 1.0) > 1e-9:
        raise InputError("detection input must be normalised")
    pi_vec = start_vector(spec)
    if backend == "exact":
        verdict, a, mass, queries = detect_summary(spec)
        if check_budget:
            budget = detection_budget(spec)
            if queries > budget + 1e-9:
                raise BudgetError(queries, budget)
        x = state.amplitudes
        coef = np.vdot(pi_vec, x)
        out = x - (1.0 + a) * coef * pi_vec if verdict else x.copy()
    elif backend == "pe":
        verdict, _, mass, _ = detect_summary(spec)
        out, queries = _pe_detect(spec, state.amplitudes)
    else:
        raise InputError(f"unknown backend {backend!r}")
    if oracle is not None:
        oracle.charge(queries)
    ideal = -pi_vec if verdict else pi_vec
    fid = float(abs(np.vdot(ideal, out)) ** 2)
    amp = float(np.real(np.vdot(pi_vec, out)))
    result = StateVector(spec.layout, out, normalized=(backend == "exact"))
    return DetectOutcome(verdict, min(1.0, fid), int(queries), amp, mass, backend), result


def pe_precision(gap):
    """Ancilla bits ``ceil(log2(1/√gap)) + 3`` for phase estimation."""
    return max(0, math.ceil(math.log2(1.0 / math.sqrt(gap)) - 1e-12)) + 3


def _pe_weights(bits):
    N = 1 << bits
    d = np.arange(-(N - 1), N)
    return d, (N - np.abs(d)) / N**2


def pe_reflection(forward: Callable, backward: Callable, bits: int, x):
    """Retained branch of "estimate phase, flip unless zero, un-estimate".

    For an eigenvector with phase ``θ`` the ancilla-restored amplitude is
    ``2|c_0(θ)|^2 - 1`` with ``|c_0|^2 = |N^{-1} sum_j e^{ijθ}|^2``, which
    expands to ``2 sum_d (N-|d|)/N^2 U^d - I``.  This evaluates that sum
    with ``2(N-1)`` applications of ``U`` and ``U^{-1}``, the same number
    the circuit uses.
    """
    d, w = _pe_weights(bits)
    N = 1 << bits
    acc = w[N - 1] * x
    fwd = x
    bwd = x
    for step in range(1, N):
        fwd = forward(fwd)
        bwd = backward(bwd)
        acc = acc + w[N - 1 + step] * fwd + w[N - 1 - step] * bwd
    return 2.0 * acc - x


def pe_reflection_circuit(forward: Callable, backward: Callable, bits: int, x):
    """Same map as :func:`pe_reflection`, simulated gate by gate.

    The ancilla register is carried as a batch axis: uniform superposition,
    controlled powers, inverse Fourier transform, phase flip on nonzero
    outcomes, then the mirror image, and finally projection back onto the
    uniform ancilla state.
    """
    N = 1 << bits
    cols = np.repeat(x[:, None], N, axis=1) / math.sqrt(N)
    y = np.arange(N)

    def powers(step):
        for j in range(bits):
            sel = (y >> j) & 1 == 1
            for _ in range(1 << j):
                cols[:, sel] = step(cols[:, sel])

    powers(forward)
    # inverse QFT on the ancilla axis: sum_y e^{-2πi y z/N} / √N
    cols = np.fft.fft(cols, axis=1, norm="ortho")
    cols[:, 1:] *= -1
    cols = np.fft.ifft(cols, axis=1, norm="ortho")
    powers(backward)
    return cols.sum(axis=1) / math.sqrt(N)


def _pe_detect(spec: WalkLevelSpec, x):
    if spec.nested:
        raise ContractError("the phase-estimation backend handles flat walks only")
    ops = walk_operators(spec)
    W, V = ops.W, ops.V
    t_w = pe_precision(spec.delta)
    t_c = pe_precision(spec.epsilon)
    check = _check_operator(spec)

    def ref_pi(v):
        return V.H(pe_reflection(W, W.H, t_w, V(v)))

    def G(v):
        return ref_pi(check(v))

    def G_inv(v):
        return check(ref_pi(v))

    out = pe_reflection(G, G_inv, t_c, x)
    n_w, n_c = 1 << t_w, 1 << t_c
    per_ref = 2 * spec.update_queries * (2 * (n_w - 1) + 1)
    queries = 2 * (n_c - 1) * (spec.check_queries + per_ref)
    return out, queries


def _check_operator(spec: WalkLevelSpec):
    """Diagonal check on ``L ⊗ D`` (identity on ``R``) as a matvec."""
    k = spec.chain.size + 1
    d = spec.data_dim
    diag = np.ones((k, d))
    labels = spec.chain.states
    for i, rec in enumerate(spec.records):
        diag[i + 1] = spec.checker.data_diagonal(i, labels[i], rec)

    def mv(x):
        batch = x.shape[1:]
        t = x.reshape(k, k, d, -1) * diag[:, None, :, None]
        return t.reshape(x.shape[:1] + batch)

    return mv


# ---------------------------------------------------------------------------
# search


@dataclass(frozen=True)
class SearchOutcome:
    verdict: bool
    probability_true: float
    queries: int
    detect: DetectOutcome


def _hadamard_probability(amplitude):
    return float(min(1.0, max(0.0, (1.0 - amplitude) / 2.0)))


def search(spec: WalkLevelSpec, oracle=None, rng=None, backend="exact") -> SearchOutcome:
    """Prepare ``|π^x>`` once, detect, and read the verdict.

    The phase flip is read out with a Hadamard test on a control qubit,
    which answers "non-empty" with probability ``(1 - Re<π|D|π>)/2``.
    """
    rng = np.random.default_rng() if rng is None else rng
    start = oracle.count if oracle is not None else 0
    state = build_setup_state(spec, oracle)
    outcome, _ = detect(spec, state, oracle, backend)
    p = _hadamard_probability(outcome.amplitude)
    used = (oracle.count - start) if oracle is not None else spec.setup_queries + outcome.queries
    return SearchOutcome(bool(rng.random() < p), p, used, outcome)


def boosted_search(spec: WalkLevelSpec, oracle=None, rng=None, target_error=1e-3, backend="exact"):
    """Majority vote over ``k = ceil(18 ln(1/target))`` independent searches.

    The runs are identical circuits, so the state is simulated once and
    ``k`` verdicts are sampled from its outcome distribution; the oracle is
    charged for all ``k`` runs.
    """
    from .oracle import boost_rounds, majority

    rng = np.random.default_rng() if rng is None else rng
    k = boost_rounds(target_error)
    first = search(spec, oracle, rng, backend)
    if oracle is not None:
        oracle.charge((k - 1) * first.queries)
    votes = rng.random(k) < first.probability_true
    return SearchOutcome(majority(votes), first.probability_true, k * first.queries, first.detect)


# ---------------------------------------------------------------------------
# amplitude amplification


def grover_iterations(epsilon):
    """Rounds ``floor(π / (4 asin √ε))`` that bring mass ``ε`` closest to one."""
    if not 0.0 < epsilon <= 1.0:
        raise InputError(f"epsilon must lie in (0, 1], got {epsilon}")
    theta = math.asin(math.sqrt(epsilon))
    return int(math.floor(math.pi / (4.0 * theta) + 1e-12))


def grover_success(mass, iterations):
    """``sin^2((2k+1) θ)`` with ``sin θ = √mass``."""
    theta = math.asin(math.sqrt(min(1.0, max(0.0, mass))))
    return math.sin((2 * iterations + 1) * theta) ** 2


def bbht_success(mass, max_iterations):
    """Success of trying ``0, 1, ..., J`` rounds in turn, verifying each answer."""
    if mass <= 0.0:
        return 0.0
    fail = 1.0
    for j in range(max_iterations + 1):
        fail *= 1.0 - grover_success(mass, j)
    return 1.0 - fail


@dataclass(frozen=True)
class AAOutcome:
    found: bool
    index: int
    success_probability: float
    iterations: int
    queries: int

    def __bool__(self):
        return self.found


def amplitude_amplification(setup: StateVector, marked, epsilon, oracle=None, rng=None,
                            flip_queries=0, setup_queries=0) -> AAOutcome:
    """Grover search from ``setup`` for basis states flagged by ``marked``.

    ``marked`` is a boolean mask over the basis (or a callable on basis
    indices).  Each round flips the marked phase and reflects through the
    setup state.  If the measured element is unmarked the standard
    exponential-guessing schedule (``0, 1, ..., ceil(1/√ε)`` rounds, each
    answer verified with one extra flip) is run as a fallback.
    """
    rng = np.random.default_rng() if rng is None else rng
    dim = setup.layout.total
    mask = np.asarray([bool(marked(i)) for i in range(dim)] if callable(marked) else marked, dtype=bool)
    if mask.shape != (dim,):
        raise InputError("marked mask does not match the setup state")
    k = grover_iterations(epsilon)
    flip = np.where(mask, -1.0, 1.0)
    ref = reflection_about(setup)
    queries = 0

    def run(rounds):
        nonlocal queries
        v = setup.amplitudes.copy()
        for _ in range(rounds):
            v = ref(flip * v)
        queries += rounds * (flip_queries + 2 * setup_queries) + setup_queries
        return np.abs(v) ** 2

    probs = run(k)
    p_first = float(probs[mask].sum())
    idx = int(rng.choice(dim, p=probs / probs.sum()))
    J = math.ceil(1.0 / math.sqrt(epsilon) - 1e-12)
    # whole procedure: fixed schedule, then the verified fallback rounds
    mass = float(np.sum(np.abs(setup.amplitudes[mask]) ** 2))
    success = 1.0 - (1.0 - p_first) * (1.0 - bbht_success(mass, J))
    if not mask[idx]:
        queries += flip_queries
        for j in range(J + 1):
            probs = run(j)
            idx = int(rng.choice(dim, p=probs / probs.sum()))
            queries += flip_queries
            if mask[idx]:
                break
    if oracle is not None:
        oracle.charge(queries)
    return AAOutcome(bool(mask[idx]), idx, success, k, queries)
