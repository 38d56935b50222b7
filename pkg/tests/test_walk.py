import math
from math import comb

import numpy as np
import pytest

from nestedwalk.algorithms import mss_spec
from nestedwalk.data import BitRecord, VectorRecord
from nestedwalk.exceptions import ContractError, InputError
from nestedwalk.graphs import Graph, complete_graph
from nestedwalk.hilbert import RegisterLayout, StateVector, apply, fidelity
from nestedwalk.markov import MarkovChain, johnson_chain, single_state_chain
from nestedwalk.oracle import QueryOracle
from nestedwalk.walk import (
    PredicateChecker,
    WalkLevelSpec,
    amplitude_amplification,
    apply_update,
    boosted_search,
    build_setup_state,
    detect,
    detection_budget,
    grover_iterations,
    grover_success,
    pe_precision,
    pe_reflection,
    pe_reflection_circuit,
    search,
    start_vector,
    szegedy_step,
    walk_operators,
)


def label_walk(chain, marked, epsilon):
    """Walk with one-dimensional data, marked by a predicate on the state label."""
    records = tuple(VectorRecord([1.0]) for _ in range(chain.size))
    checker = PredicateChecker(lambda label, rec: marked(label), name="label")
    return WalkLevelSpec(chain, records, checker, epsilon)


def contains_zero(n, r):
    return label_walk(johnson_chain(n, r), lambda R: 0 in R, r / n)


def test_spec_validation():
    c = johnson_chain(4, 1)
    with pytest.raises(InputError):
        label_walk(c, lambda s: False, 0.0)
    with pytest.raises(InputError):
        WalkLevelSpec(c, (VectorRecord([1.0]),), PredicateChecker(lambda *a: False), 0.5)
    mixed = (VectorRecord([1.0]),) * 3 + (VectorRecord([0, 1.0]),)
    with pytest.raises(ContractError):
        WalkLevelSpec(c, mixed, PredicateChecker(lambda *a: False), 0.5)


def test_trivial_setup_state_is_uniform():
    spec = label_walk(johnson_chain(4, 1), lambda s: False, 1.0)
    o = QueryOracle([])
    s = build_setup_state(spec, o)
    assert o.count == 0
    probs = s.probabilities("L")
    assert probs[0] == 0
    assert np.allclose(probs[1:], 1 / 4)
    assert np.allclose(s.probabilities("R"), [1, 0, 0, 0, 0])


def test_mss_setup_charges_the_stored_pairs():
    G = Graph.from_edges(5, [(0, 1), (1, 2), (0, 2)])
    o = QueryOracle(G.bits)
    spec = mss_spec(5, 2, o)
    s = build_setup_state(spec, o)
    assert o.count == comb(2, 2) == 1
    assert s.norm() == pytest.approx(1.0)


def test_identity_data_update_is_query_free():
    spec = label_walk(johnson_chain(5, 2), lambda s: False, 1.0)
    assert spec.update_queries == 0
    ops = walk_operators(spec)
    x = np.random.default_rng(0).normal(size=spec.layout.total)
    assert np.allclose(ops.U_D(x), x)


def test_johnson_step_refreshes_swapped_rows():
    n, r = 6, 3
    G = complete_graph(n)
    o = QueryOracle(G.bits)
    spec = mss_spec(n, r, o)
    assert spec.update_queries == 2 * (r - 1)
    for (i, j), t in spec.transitions.items():
        assert t.queries == 2 * (r - 1)
    s = build_setup_state(spec, o)
    before = o.count
    apply(apply_update(spec, o), s)
    assert o.count - before == 2 * (r - 1)


def test_update_maps_data_between_neighbours():
    n, r = 5, 2
    G = Graph.from_edges(n, [(0, 1), (1, 2), (2, 3)])
    spec = mss_spec(n, r, QueryOracle(G.bits))
    ops = walk_operators(spec)
    lay = spec.layout
    k = spec.chain.size + 1
    d = spec.data_dim
    for (i, j) in list(spec.transitions)[:10]:
        x = np.zeros(lay.total, dtype=complex)
        off = ((i + 1) * k + (j + 1)) * d
        x[off:off + d] = spec.records[i].vector()
        y = ops.U_D(x)
        assert np.allclose(y[off:off + d], spec.records[j].vector())


def test_up_reproduces_transition_rows():
    chain = johnson_chain(5, 2)
    spec = label_walk(chain, lambda s: False, 1.0)
    up = walk_operators(spec).U_P
    P = chain.dense()
    for u in range(chain.size):
        s = StateVector.basis(spec.layout, L=u + 1, R=0)
        out = apply(up, s)
        assert np.abs(out.probabilities("R")[1:] - P[u]).max() <= 1e-9
        assert np.allclose(out.probabilities("L")[u + 1], 1.0)


def test_up_then_inverse_is_identity():
    spec = label_walk(johnson_chain(5, 2), lambda s: False, 1.0)
    up = walk_operators(spec).U_P
    rng = np.random.default_rng(1)
    x = rng.normal(size=spec.layout.total) + 1j * rng.normal(size=spec.layout.total)
    assert np.abs(up.H(up(x)) - x).max() <= 1e-12


def test_szegedy_single_state_is_identity():
    spec = label_walk(single_state_chain(), lambda s: False, 1.0)
    assert np.allclose(szegedy_step(spec).to_matrix(), np.eye(spec.layout.total))


def test_szegedy_two_state_swap_chain():
    # eigenvalues {1, -1} of P give walk phases 2 arccos(lambda) = {0, 2 pi}, both trivial
    chain = MarkovChain.from_matrix([0, 1], [[0, 1], [1, 0]])
    spec = label_walk(chain, lambda s: False, 1.0)
    W = szegedy_step(spec).to_matrix()
    assert np.allclose(np.angle(np.linalg.eigvals(W)), 0, atol=1e-9)


def test_szegedy_phase_gap_on_johnson_4_2():
    chain = johnson_chain(4, 2)
    spec = label_walk(chain, lambda s: False, 1.0)
    phases = np.abs(np.angle(np.linalg.eigvals(szegedy_step(spec).to_matrix())))
    gap = phases[phases > 1e-6].min()
    assert gap >= math.sqrt(2 * chain.delta) - 1e-9
    # each chain eigenvalue cos(t) gives the walk phases +-2t (mod 2 pi)
    lam = np.linalg.eigvalsh(chain.dense())
    two_t = 2 * np.arccos(np.clip(lam, -1, 1))
    wrapped = np.minimum(two_t, 2 * np.pi - two_t)
    assert gap == pytest.approx(wrapped[wrapped > 1e-6].min(), abs=1e-9)


def test_szegedy_is_unitary_on_random_states():
    spec = contains_zero(5, 2)
    W = szegedy_step(spec)
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.normal(size=spec.layout.total) + 1j * rng.normal(size=spec.layout.total)
        x /= np.linalg.norm(x)
        assert abs(np.linalg.norm(W(x)) - 1) <= 1e-9


@pytest.mark.parametrize("backend", ["exact", "pe"])
def test_detect_everything_marked(backend):
    spec = label_walk(johnson_chain(5, 2), lambda s: True, 1.0)
    pi = build_setup_state(spec)
    out, state = detect(spec, pi, backend=backend)
    assert out.verdict
    assert out.fidelity == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("backend", ["exact", "pe"])
def test_detect_nothing_marked(backend):
    spec = label_walk(johnson_chain(5, 2), lambda s: False, 0.25)
    pi = build_setup_state(spec)
    out, state = detect(spec, pi, backend=backend)
    assert not out.verdict
    assert out.fidelity >= 1 - 1e-9


def test_detect_phase_estimation_on_johnson_8_2():
    spec = contains_zero(8, 2)
    assert spec.epsilon == 0.25
    o = QueryOracle([])
    out, _ = detect(spec, build_setup_state(spec), o, backend="pe")
    assert out.fidelity >= 0.9
    assert out.queries == o.count


def test_phase_estimation_fidelity_with_random_data_phases():
    chain = johnson_chain(8, 2)
    rng = np.random.default_rng(11)
    checker = PredicateChecker(lambda R, rec: 0 in R, name="contains 0")
    for _ in range(20):
        records = tuple(VectorRecord([np.exp(2j * math.pi * rng.random())]) for _ in range(chain.size))
        spec = WalkLevelSpec(chain, records, checker, 0.25)
        out, _ = detect(spec, build_setup_state(spec), backend="pe")
        assert out.fidelity >= 0.9


def test_detect_exact_is_an_involution():
    spec = contains_zero(6, 2)
    rng = np.random.default_rng(3)
    pi = start_vector(spec)
    x = pi + 0.3 * (rng.normal(size=pi.size) + 1j * rng.normal(size=pi.size))
    x /= np.linalg.norm(x)
    s = StateVector(spec.layout, x)
    _, once = detect(spec, s)
    _, twice = detect(spec, once)
    assert np.abs(twice.amplitudes - x).max() <= 1e-9
    assert fidelity(once, s) < 1


def test_detect_rejects_bad_input():
    spec = contains_zero(5, 2)
    with pytest.raises(InputError):
        detect(spec, StateVector.basis(RegisterLayout([("q", 2)])))
    with pytest.raises(InputError):
        detect(spec, build_setup_state(spec), backend="magic")


def test_declared_bound_must_hold():
    spec = label_walk(johnson_chain(5, 2), lambda R: R == (0, 1), 0.5)
    with pytest.raises(ContractError):
        detect(spec, build_setup_state(spec))


def test_detect_respects_the_budget():
    spec = contains_zero(7, 2)
    o = QueryOracle([])
    out, _ = detect(spec, build_setup_state(spec), o)
    assert out.queries <= detection_budget(spec)


def test_search_verdicts():
    rng = np.random.default_rng(4)
    empty = label_walk(johnson_chain(5, 2), lambda s: False, 0.4)
    full = contains_zero(5, 2)
    assert sum(not search(empty, rng=rng).verdict for _ in range(200)) >= 2 / 3 * 200
    assert sum(search(full, rng=rng).verdict for _ in range(200)) >= 2 / 3 * 200


def test_search_query_count_within_budget():
    G = complete_graph(5)
    o = QueryOracle(G.bits)
    spec = mss_spec(5, 2, o)
    out = search(spec, o, np.random.default_rng(5))
    assert out.queries == o.count
    assert out.queries <= spec.setup_queries + detection_budget(spec)


@pytest.mark.parametrize("n,r", [(4, 1), (5, 2), (6, 2)])
def test_search_matches_brute_force_on_toys(n, r):
    rng = np.random.default_rng(n * 10 + r)
    chain = johnson_chain(n, r)
    for target in range(n + 1):
        spec = label_walk(chain, lambda R, t=target: t in R, r / n)
        truth = target < n
        wrong = sum(search(spec, rng=rng).verdict != truth for _ in range(30))
        assert wrong <= 10


def test_boosted_search_charges_every_round():
    spec = contains_zero(5, 2)
    o = QueryOracle([])
    out = boosted_search(spec, o, np.random.default_rng(0), target_error=0.01)
    assert out.verdict
    assert o.count == out.queries


def test_grover_single_marked_of_four():
    lay = RegisterLayout([("i", 4)])
    setup = StateVector(lay, np.full(4, 0.5))
    assert grover_iterations(0.25) == 1
    out = amplitude_amplification(setup, [False, False, True, False], 0.25, rng=np.random.default_rng(0))
    assert out.found and out.index == 2
    assert out.success_probability == pytest.approx(1.0)


def test_grover_everything_marked():
    lay = RegisterLayout([("i", 3)])
    setup = StateVector(lay, np.full(3, 1 / math.sqrt(3)))
    out = amplitude_amplification(setup, [True] * 3, 1.0, rng=np.random.default_rng(0))
    assert out.found and out.success_probability >= 2 / 3


def test_grover_rotation_closed_form():
    N = 64
    lay = RegisterLayout([("i", N)])
    setup = StateVector(lay, np.full(N, 1 / math.sqrt(N)))
    mask = np.zeros(N, dtype=bool)
    mask[:4] = True
    eps = 4 / N
    k = grover_iterations(eps)
    flip = np.where(mask, -1.0, 1.0)
    v = setup.amplitudes.copy()
    psi = setup.amplitudes
    for _ in range(k):
        v = flip * v
        v = 2 * psi * np.vdot(psi, v) - v
    theta = math.asin(math.sqrt(eps))
    assert abs(np.sum(np.abs(v[mask]) ** 2) - math.sin((2 * k + 1) * theta) ** 2) <= 1e-9
    assert abs(grover_success(eps, k) - math.sin((2 * k + 1) * theta) ** 2) <= 1e-12
    out = amplitude_amplification(setup, mask, eps, rng=np.random.default_rng(0))
    assert out.iterations == k


def test_grover_falls_back_when_the_guess_is_off():
    N = 64
    lay = RegisterLayout([("i", N)])
    setup = StateVector(lay, np.full(N, 1 / math.sqrt(N)))
    mask = np.zeros(N, dtype=bool)
    mask[:20] = True
    rng = np.random.default_rng(9)
    hits = sum(amplitude_amplification(setup, mask, 1 / N, rng=rng).found for _ in range(60))
    assert hits >= 2 / 3 * 60


def test_grover_epsilon_range():
    with pytest.raises(InputError):
        grover_iterations(0.0)
    with pytest.raises(InputError):
        grover_iterations(1.5)


def test_pe_circuit_matches_closed_form():
    rng = np.random.default_rng(6)
    from scipy.stats import unitary_group
    U = unitary_group.rvs(5, random_state=rng)
    x = rng.normal(size=5) + 1j * rng.normal(size=5)
    x /= np.linalg.norm(x)
    a = pe_reflection(lambda v: U @ v, lambda v: U.conj().T @ v, 3, x)
    b = pe_reflection_circuit(lambda v: U @ v, lambda v: U.conj().T @ v, 3, x)
    assert np.abs(a - b).max() <= 1e-10


def test_pe_precision():
    assert pe_precision(1.0) == 3
    assert pe_precision(1 / 16) == 5


def test_bit_record_layout():
    rec = BitRecord([0, None, 2], [1, 0, 1])
    assert rec.index == 0b101 and rec.dim == 8 and rec.setup_queries == 2
