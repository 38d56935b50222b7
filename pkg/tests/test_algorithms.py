from fractions import Fraction
from math import comb

import numpy as np
import pytest

from nestedwalk.algorithms import (
    TriangleParams,
    collision_set_size,
    collision_walk_spec,
    graph_collision_walk,
    mss_spec,
    nested_3527_spec,
    nested_97_spec,
    asymptotic_budget_3527,
    run_walk,
    triangle_mss,
    triangle_nested_3527,
    triangle_nested_97,
)
from nestedwalk.exceptions import InputError
from nestedwalk.graphs import Graph, Marking, has_graph_collision, has_triangle, random_graph
from nestedwalk.hilbert import apply
from nestedwalk.oracle import QueryOracle
from nestedwalk.walk import apply_update, build_setup_state, search

K3_PLUS_TWO = Graph.from_edges(5, [(0, 1), (1, 2), (0, 2)])
ONE_TRIANGLE_6 = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)])


def bipartite(r1, r2, cross):
    edges = [(i, r1 + j) for i, j in cross]
    return Graph.from_edges(r1 + r2, edges)


def test_params_validation():
    p = TriangleParams(r=3, s="1/3")
    assert p.s == Fraction(1, 3) and p.inner_size() == 1
    with pytest.raises(InputError):
        TriangleParams(r=0)
    with pytest.raises(InputError):
        TriangleParams(s=0)
    with pytest.raises(InputError):
        TriangleParams(r1=3, r2=2)
    with pytest.raises(InputError):
        TriangleParams(r1=2, r2=5)
    with pytest.raises(InputError):
        TriangleParams(r=7).check(6)


def test_inner_size_rounds_to_a_positive_integer():
    assert TriangleParams(r=4, s=Fraction(1, 4)).inner_size() == 2
    assert TriangleParams(r=2, s=Fraction(1, 10)).inner_size() == 1


def test_collision_set_size():
    assert collision_set_size(3, 3) == 2
    assert collision_set_size(1, 1) == 1
    assert collision_set_size(2, 4) == 2


def test_asymptotic_budget_preset():
    assert asymptotic_budget_3527(100, 10, Fraction(1, 2)) == 35 + 461


def test_mss_triangle_free_is_false():
    G = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    rng = np.random.default_rng(0)
    assert sum(not triangle_mss(G, 2, rng=rng) for _ in range(30)) >= 20


def test_mss_finds_k3_plus_isolated():
    o = QueryOracle(K3_PLUS_TWO.bits)
    spec = mss_spec(5, 2, o)
    rng = np.random.default_rng(1)
    hits = sum(search(spec, o, rng).verdict for _ in range(200))
    assert hits >= 2 / 3 * 200
    assert triangle_mss(K3_PLUS_TWO, 2, rng=rng, target_error=1e-3)


def test_mss_marked_fraction_with_one_triangle():
    G = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2)])
    spec = mss_spec(6, 3, QueryOracle(G.bits))
    assert len(spec.marked()) == 10 and spec.chain.size == 20
    assert spec.epsilon <= 10 / 20


def test_mss_rejects_bad_r():
    with pytest.raises(InputError):
        triangle_mss(K3_PLUS_TWO, 1)
    with pytest.raises(InputError):
        triangle_mss(K3_PLUS_TWO, 2, o=QueryOracle([0, 1]))


def test_mss_query_accounting():
    for seed in range(5):
        G = random_graph(6, 0.5, np.random.default_rng(seed))
        o = QueryOracle(G.bits)
        spec = mss_spec(6, 3, o)
        s = build_setup_state(spec, o)
        assert o.count == comb(3, 2)
        apply(apply_update(spec, o), s)
        assert o.count == comb(3, 2) + 2 * (3 - 1)


def test_3527_inner_marked_fraction_is_s():
    spec = nested_3527_spec(6, TriangleParams(r=3, s=Fraction(1, 3)), QueryOracle(ONE_TRIANGLE_6.bits))
    R = (0, 1, 3)
    inner = spec.meta["inner"][spec.chain.states.index(R)]
    assert len(inner.marked()) / inner.chain.size == pytest.approx(1 / 3)
    assert spec.meta["t"] == 1


def test_3527_edgeless_is_false():
    rng = np.random.default_rng(2)
    assert not triangle_nested_3527(Graph.from_edges(6), TriangleParams(r=3), rng=rng, target_error=1e-3)


def test_3527_records_budget_and_bit_convention():
    spec = nested_3527_spec(6, TriangleParams(r=3), QueryOracle(ONE_TRIANGLE_6.bits))
    assert spec.meta["budget"] >= 0
    assert "fresh_bits" in spec.meta and "stored_bits" in spec.meta
    fixed = nested_3527_spec(6, TriangleParams(r=3, budget=0), QueryOracle(ONE_TRIANGLE_6.bits))
    assert fixed.meta["budget"] == 0


def test_97_outer_marked_fraction():
    spec = nested_97_spec(6, TriangleParams(r1=2, r2=2), QueryOracle(ONE_TRIANGLE_6.bits))
    assert len(spec.marked()) / spec.chain.size == pytest.approx(4 / 5)
    assert spec.epsilon == pytest.approx(4 / 5)


def test_97_triangle_free_is_false():
    G = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
    rng = np.random.default_rng(3)
    assert not triangle_nested_97(G, TriangleParams(r1=2, r2=2), rng=rng, target_error=1e-3)


def test_97_rejects_r2_equal_to_n():
    with pytest.raises(InputError):
        nested_97_spec(4, TriangleParams(r1=2, r2=4), QueryOracle([0] * 6))


@pytest.mark.parametrize("algo", ["3527", "97"])
def test_nested_small_family_matches_brute_force(algo):
    rng = np.random.default_rng(4)
    for _ in range(8):
        G = random_graph(6, 0.45, rng)
        if algo == "3527":
            got = triangle_nested_3527(G, TriangleParams(r=3), rng=rng, target_error=1e-3)
        else:
            got = triangle_nested_97(G, TriangleParams(r1=2, r2=2), rng=rng, target_error=1e-3)
        assert got == (has_triangle(G) is not None)


def test_collision_everything_marked():
    G = bipartite(3, 3, [(i, j) for i in range(3) for j in range(3)])
    rng = np.random.default_rng(5)
    assert sum(graph_collision_walk(G, [1] * 6, 2, rng=rng) for _ in range(30)) >= 20


def test_collision_nothing_marked():
    G = bipartite(3, 3, [(i, j) for i in range(3) for j in range(3)])
    rng = np.random.default_rng(6)
    assert sum(not graph_collision_walk(G, [0] * 6, 2, rng=rng) for _ in range(30)) >= 20


def test_collision_sampled_family_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(40):
        mask = rng.random((3, 3)) < 0.5
        G = bipartite(3, 3, [(i, j) for i in range(3) for j in range(3) if mask[i, j]])
        mk = Marking.from_bits(rng.integers(0, 2, 6))
        got = graph_collision_walk(G, mk, 2, rng=rng, target_error=1e-3)
        assert got == (has_graph_collision(G, mk) is not None)


def test_collision_counts():
    G = bipartite(3, 3, [(0, 0), (1, 2)])
    o = QueryOracle([1, 0, 1, 1, 0, 1])
    spec = collision_walk_spec(G, 3, 3, 2, o)
    s = build_setup_state(spec, o)
    assert o.count == 2 * 2
    apply(apply_update(spec, o), s)
    assert o.count == 4 + 4
    assert spec.check_queries == 0


def test_collision_argument_checks():
    G = bipartite(3, 3, [])
    with pytest.raises(InputError):
        graph_collision_walk(G, [0] * 5, 2)
    with pytest.raises(InputError):
        collision_walk_spec(G, 3, 3, 4, QueryOracle([0] * 6))
    with pytest.raises(InputError):
        collision_walk_spec(G, 2, 3, 1, QueryOracle([0] * 6))


def test_run_walk_reports_metadata():
    o = QueryOracle(K3_PLUS_TWO.bits)
    res = run_walk(mss_spec(5, 2, o), o, np.random.default_rng(8))
    assert res.queries == o.count
    assert res.setup_queries == 1 and res.update_queries == 2
    assert res.meta["fresh_bits"] == "k-to-set adjacency"
