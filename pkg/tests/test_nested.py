import itertools
import math

import numpy as np
import pytest
from scipy.stats import hypergeom, unitary_group

from nestedwalk.algorithms import TriangleParams, nested_3527_spec, run_walk
from nestedwalk.data import BitRecord
from nestedwalk.exceptions import ContractError, InputError
from nestedwalk.graphs import has_triangle, random_graph
from nestedwalk.hilbert import LinearOp, RegisterLayout, identity
from nestedwalk.markov import johnson_chain
from nestedwalk.nested import (
    NestedWalkSpec,
    OuterLevel,
    TruncationInstance,
    compose_k_level,
    compose_two_level,
    degree_instance,
    full_controlled,
    markov_budget,
    random_truncation_instance,
    toy_three_level,
    truncated_controlled,
    truncation_overlap,
    update_deviation,
    witness_violations,
)
from nestedwalk.oracle import QueryOracle
from nestedwalk.walk import PredicateChecker, WalkLevelSpec, detect, detect_summary, build_setup_state


def bit_walk(chain, values, name="inner", offset=0, oracle=None):
    """Walk on ``chain`` whose state ``i`` stores input bit ``offset + i`` and is marked by it."""
    o = QueryOracle(values) if oracle is None else oracle
    records = tuple(BitRecord.read([offset + i], o, label=s) for i, s in enumerate(chain.states))
    checker = PredicateChecker(lambda s, rec: rec.values[0] == 1, name="bit")
    return WalkLevelSpec(chain, records, checker, 1 / chain.size, name=name)


def degenerate_pair(outer_marked):
    chain = johnson_chain(4, 1)
    inner_chain = johnson_chain(3, 1)
    outer = OuterLevel(chain, 1 / 4, marked=lambda u: u[0] in outer_marked)

    # outer state u owns input bits 3u, 3u+1, 3u+2
    o = QueryOracle([int(u in outer_marked) for u in range(4) for _ in range(3)])

    def inner(u):
        return bit_walk(inner_chain, None, offset=3 * u[0], oracle=o)

    return outer, inner


def test_degenerate_inner_walk_reproduces_outer_predicate():
    outer, inner = degenerate_pair({1, 3})
    spec = compose_two_level(outer, inner)
    assert spec.marked() == [1, 3]
    assert not witness_violations(spec)
    out, _ = detect(spec, build_setup_state(spec))
    assert out.verdict
    assert out.fidelity >= 1 - 1e-6


def test_unmarked_composition_is_identity():
    outer, inner = degenerate_pair(set())
    spec = compose_two_level(outer, inner)
    out, _ = detect(spec, build_setup_state(spec))
    assert not out.verdict and out.fidelity >= 1 - 1e-9


def test_witness_mismatch_is_a_contract_error():
    chain = johnson_chain(4, 1)
    outer = OuterLevel(chain, 1 / 4, marked=lambda u: u[0] == 0)
    with pytest.raises(ContractError):
        compose_two_level(outer, lambda u: bit_walk(johnson_chain(3, 1), [0, 0, 0]))


def test_check_preserves_the_inner_start_state():
    outer, inner = degenerate_pair({0, 2})
    spec = compose_two_level(outer, inner)
    for idx, rec in enumerate(spec.records):
        v = rec.vector()
        M = spec.checker.operator_on_data(idx, spec.chain.states[idx], rec)
        w = M @ v
        assert abs(np.vdot(v, w)) ** 2 >= 0.99


def test_composed_detection_twice_restores_input():
    outer, inner = degenerate_pair({2})
    spec = compose_two_level(outer, inner)
    s = build_setup_state(spec)
    _, once = detect(spec, s)
    _, twice = detect(spec, once)
    assert abs(np.vdot(s.amplitudes, twice.amplitudes)) ** 2 >= 1 - 1e-6


def test_outer_update_transports_inner_start_states():
    outer, inner = degenerate_pair({1})
    spec = compose_two_level(outer, inner)
    assert update_deviation(spec) <= 1e-9


def test_inconsistent_copies_of_a_bit_are_rejected():
    from nestedwalk.data import transition

    with pytest.raises(ContractError):
        transition(BitRecord([4], [1]), BitRecord([4], [0]))


def test_one_level_fold_is_the_flat_walk():
    flat = bit_walk(johnson_chain(4, 1), [0, 1, 0, 0])
    assert compose_k_level(NestedWalkSpec((lambda prefix: flat,))) is flat
    with pytest.raises(InputError):
        compose_k_level(NestedWalkSpec(()))


def test_two_level_fold_matches_direct_composition():
    outer, inner = degenerate_pair({0, 1})
    direct = compose_two_level(outer, inner)
    folded = compose_k_level(NestedWalkSpec((lambda p: outer, lambda p: inner(p[0]))))
    assert np.array_equal(build_setup_state(direct).amplitudes, build_setup_state(folded).amplitudes)
    assert detect_summary(direct) == detect_summary(folded)
    assert direct.checks == folded.checks


def test_three_level_toy_is_exhaustively_correct():
    for bits in itertools.product([0, 1], repeat=6):
        o = QueryOracle(bits)
        spec = compose_k_level(toy_three_level(o))
        truth = any(bits[(u + v) % 3] and bits[3 + (v + w) % 3]
                    for u in range(4) for v in range(4) for w in range(4))
        assert detect_summary(spec)[0] == truth
        assert not witness_violations(spec)


def test_three_level_toy_needs_six_bits():
    with pytest.raises(InputError):
        toy_three_level(QueryOracle([0, 1]))


def branch_op(U):
    return LinearOp.from_matrix(RegisterLayout([("t", U.shape[0])]), U)


def test_truncation_with_full_budget_is_exact():
    rng = np.random.default_rng(0)
    branches = tuple((0.5, branch_op(unitary_group.rvs(2, random_state=rng)), q) for q in (1, 2, 3, 4))
    t = TruncationInstance(branches, 4)
    op, err = truncated_controlled(t)
    assert err == 0.0
    assert np.allclose(op.to_matrix(), full_controlled(t).to_matrix())


def test_zero_budget_is_identity():
    rng = np.random.default_rng(1)
    branches = tuple((0.5, branch_op(unitary_group.rvs(2, random_state=rng)), q) for q in (1, 2, 3, 4))
    op, err = truncated_controlled(TruncationInstance(branches, 0))
    assert err == pytest.approx(1.0)
    assert np.allclose(op.to_matrix(), np.eye(8))
    assert op.queries == 0


def test_four_branch_example():
    rng = np.random.default_rng(2)
    branches = tuple((0.5, branch_op(unitary_group.rvs(3, random_state=rng)), q) for q in (1, 1, 1, 10))
    t = TruncationInstance(branches, 1)
    op, err = truncated_controlled(t)
    assert err == pytest.approx(0.25)
    assert op.queries == 1
    states = []
    for _ in range(4):
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        states.append(v / np.linalg.norm(v))
    overlap, _ = truncation_overlap(t, states)
    assert overlap >= 0.75 - 1e-9


def test_ties_at_the_budget_are_kept():
    branches = ((math.sqrt(0.5), branch_op(-np.eye(2)), 3), (math.sqrt(0.5), branch_op(np.eye(2)), 5))
    _, err = truncated_controlled(TruncationInstance(branches, 3))
    assert err == pytest.approx(0.5)


def test_dropping_a_sign_flip_costs_twice_its_weight():
    # the dropped branch would have applied -I, so its overlap contribution is -w instead of +w
    w = 0.2
    branches = ((math.sqrt(1 - w), branch_op(np.eye(2)), 0), (math.sqrt(w), branch_op(-np.eye(2)), 5))
    t = TruncationInstance(branches, 0)
    overlap, err = truncation_overlap(t, [np.array([1, 0]), np.array([0, 1])])
    assert err == pytest.approx(w)
    assert overlap == pytest.approx(1 - 2 * w)
    assert overlap < 1 - err


def test_corrected_overlap_bound_on_random_instances():
    rng = np.random.default_rng(3)
    for _ in range(100):
        t, states = random_truncation_instance(rng)
        overlap, err = truncation_overlap(t, states)
        assert overlap >= 1 - 2 * err - 1e-9


def test_instance_validation():
    op = identity(RegisterLayout([("t", 2)]))
    with pytest.raises(InputError):
        TruncationInstance(())
    with pytest.raises(InputError):
        TruncationInstance(((0.5, op, 1),))
    with pytest.raises(InputError):
        TruncationInstance(((1.0, op, -1),))


def test_markov_budget_at_k_one_is_the_mean():
    branches = tuple((0.5, identity(RegisterLayout([("t", 1)])), q) for q in (2, 4, 6, 8))
    t = TruncationInstance(branches)
    q, bound = markov_budget(t, 1)
    assert q == 5 and bound == 1.0
    with pytest.raises(InputError):
        markov_budget(t, 0.5)


def test_uniform_costs_drop_nothing():
    branches = tuple((0.5, identity(RegisterLayout([("t", 1)])), 3) for _ in range(4))
    t = TruncationInstance(branches)
    for k in (1, 2, 7):
        q, _ = markov_budget(t, k)
        assert truncated_controlled(t.with_budget(q))[1] == 0.0


def test_hypergeometric_degree_instance():
    n_pairs, incident, sample = 45, 9, 15
    t = degree_instance(n_pairs, incident, sample)
    dist = hypergeom(n_pairs, incident, sample)
    assert np.allclose(t.weights, [dist.pmf(i) for i in range(0, incident + 1)])
    q, bound = markov_budget(t, 7)
    _, err = truncated_controlled(t.with_budget(q))
    assert bound == pytest.approx(1 / 7)
    assert err <= 1 / 7
    assert err < 1e-3


def test_nested_3527_small_family_matches_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(6):
        G = random_graph(6, 0.5, rng)
        o = QueryOracle(G.bits)
        spec = nested_3527_spec(6, TriangleParams(r=3), o)
        res = run_walk(spec, o, rng, target_error=1e-3)
        assert res.verdict == (has_triangle(G) is not None)
