"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line (collected again in the terminal
summary) and then asserts the same condition, including its time limit.
"""
import itertools
import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from nestedwalk.algorithms import (
    TriangleParams,
    collision_walk_spec,
    graph_collision_walk,
    mss_spec,
    nested_3527_spec,
    nested_97_spec,
    triangle_nested_3527,
    triangle_nested_97,
)
from nestedwalk.cli import FORMULAS
from nestedwalk.costmodel import (
    DEFAULT_GRID,
    SubgraphProgram,
    evaluate_program,
    fit_exponent,
    optimize_exponents,
    optimize_program,
    parse_program,
    program_constraints,
    valid_orderings,
)
from nestedwalk.data import VectorRecord
from nestedwalk.graphs import Graph, Marking, has_graph_collision, has_triangle, random_graph
from nestedwalk.hilbert import apply
from nestedwalk.markov import johnson_chain, spectral_gap
from nestedwalk.nested import (
    compose_k_level,
    markov_budget,
    random_truncation_instance,
    toy_three_level,
    truncation_overlap,
    update_deviation,
    witness_violations,
)
from nestedwalk.oracle import QueryOracle
from nestedwalk.validation import _nesting_specs
from nestedwalk.walk import PredicateChecker, WalkLevelSpec, apply_update, build_setup_state, detect

from test_walk import label_walk

K3_EDGES = [(0, 1), (0, 2), (1, 2)]
K3_TEXT = "H: 3 1-2 1-3 2-3\nsetup\nloadvertex 1\nloadvertex 2\nloadedge 1 2\nloadvertex 3\nloadedge 1 3\nloadedge 2 3\n"


def test_criterion_1_johnson_gaps(verdict):
    start = time.perf_counter()
    worst = 0.0
    for n in range(3, 11):
        for r in range(2, n):
            worst = max(worst, abs(spectral_gap(johnson_chain(n, r)) - n / (r * (n - r))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10
    verdict(1, ok, f"max |gap - n/(r(n-r))| = {worst:.2e} over 2<=r<n<=10 in {elapsed:.2f}s")
    assert ok


def test_criterion_2_exact_exponents(verdict):
    want = {
        "mss": (F(13, 10), [F(3, 5)]),
        "t3527": (F(35, 27), [F(2, 3), F(-1, 27)]),
        "t97": (F(9, 7), [F(4, 7), F(5, 7)]),
    }
    start = time.perf_counter()
    got = {}
    for name, (build, constraints, *_rest) in FORMULAS.items():
        expr = build()
        opt = optimize_exponents(expr, constraints())
        got[name] = (opt.value, [opt.assignment[v] for v in expr.variables])
    elapsed = time.perf_counter() - start
    ok = got == want and elapsed < 1
    shown = ", ".join(f"{k}={v[0]} at {[str(a) for a in v[1]]}" for k, v in got.items())
    verdict(2, ok, f"{shown} in {elapsed:.2f}s")
    assert ok


def test_criterion_3_numeric_fit(verdict):
    start = time.perf_counter()
    gaps = {}
    for name, (build, constraints, numeric, seed, bounds) in FORMULAS.items():
        exact = optimize_exponents(build(), constraints()).value
        slope = fit_exponent(numeric, DEFAULT_GRID, seed, bounds)
        gaps[name] = abs(slope - float(exact))
    elapsed = time.perf_counter() - start
    ok = max(gaps.values()) <= 0.01 and elapsed < 30
    shown = ", ".join(f"{k}: {v:.1e}" for k, v in gaps.items())
    verdict(3, ok, f"|fitted slope - exact| {shown} over n in [1e3, 1e9] in {elapsed:.2f}s")
    assert ok


def test_criterion_4_k3_program(verdict):
    start = time.perf_counter()
    canonical = optimize_program(parse_program(K3_TEXT)).value
    values = set()
    orders = valid_orderings(3, K3_EDGES)
    for ins in orders:
        p = SubgraphProgram(3, K3_EDGES, ins)
        cons, disj = program_constraints(p)
        values.add(optimize_exponents(evaluate_program(p.with_params(None)), cons, disj, tie_break=False).value)
    elapsed = time.perf_counter() - start
    ok = canonical == F(9, 7) and values == {F(9, 7)} and elapsed < 5
    verdict(4, ok, f"canonical K3 program {canonical}; {len(orders)} valid orderings give "
                   f"{sorted(str(v) for v in values)} in {elapsed:.2f}s")
    assert ok


def _lemma_instances():
    rng = np.random.default_rng(5)
    return [random_truncation_instance(rng) for _ in range(100)]


@pytest.mark.xfail(strict=True, reason=(
    "the bound 1 - w is false: a dropped branch whose unitary rotates its state (e.g. -I) "
    "contributes -w instead of +w, so only 1 - 2w holds in general"))
def test_criterion_5_averaging_lemma(verdict):
    start = time.perf_counter()
    tight = corrected = markov_ok = 0
    worst = 0.0
    for inst, states in _lemma_instances():
        overlap, w = truncation_overlap(inst, states)
        tight += overlap >= 1 - w - 1e-9
        corrected += overlap >= 1 - 2 * w - 1e-9
        worst = max(worst, (1 - w) - overlap)
        _, predicted = markov_budget(inst, 7)
        markov_ok += predicted <= 1 / 7 + 1e-12
    elapsed = time.perf_counter() - start
    ok = tight == 100 and markov_ok == 100 and elapsed < 10
    verdict(5, ok, f"overlap >= 1 - w in {tight}/100 (worst shortfall {worst:.3f}); "
                   f"overlap >= 1 - 2w in {corrected}/100; k=7 budget error <= 1/7 in {markov_ok}/100 "
                   f"in {elapsed:.2f}s")
    assert ok


def test_criterion_5_corrected_bound_and_markov_budget():
    for inst, states in _lemma_instances():
        overlap, w = truncation_overlap(inst, states)
        assert overlap >= 1 - 2 * w - 1e-9
        q, predicted = markov_budget(inst, 7)
        assert predicted <= 1 / 7 + 1e-12
        assert float(inst.weights[inst.costs > q].sum()) <= predicted + 1e-12


def test_criterion_6_detection_fidelity(verdict):
    start = time.perf_counter()
    marked = label_walk(johnson_chain(8, 2), lambda R: 0 in R, 0.25)
    empty = label_walk(johnson_chain(8, 2), lambda R: False, 0.25)
    fid = {}
    for backend in ("pe", "exact"):
        for name, spec in (("marked", marked), ("empty", empty)):
            out, _ = detect(spec, build_setup_state(spec), backend=backend)
            fid[backend, name] = out.fidelity
    # the same check with 20 random phases on the stored data
    rng = np.random.default_rng(6)
    chain = johnson_chain(8, 2)
    checker = PredicateChecker(lambda R, rec: 0 in R, name="contains 0")
    for _ in range(20):
        records = tuple(VectorRecord([np.exp(2j * math.pi * rng.random())]) for _ in range(chain.size))
        spec = WalkLevelSpec(chain, records, checker, 0.25)
        out, _ = detect(spec, build_setup_state(spec), backend="pe")
        fid["pe", "marked"] = min(fid["pe", "marked"], out.fidelity)
    elapsed = time.perf_counter() - start
    ok = (fid["pe", "marked"] >= 0.9 and fid["pe", "empty"] >= 0.99
          and fid["exact", "marked"] >= 1 - 1e-9 and fid["exact", "empty"] >= 1 - 1e-9 and elapsed < 60)
    verdict(6, ok, f"J(8,2) phase estimation min {fid['pe', 'marked']:.4f} marked (21 phasings) / {fid['pe', 'empty']:.4f} empty; "
                   f"exact {fid['exact', 'marked']:.12f} / {fid['exact', 'empty']:.12f} in {elapsed:.2f}s")
    assert ok


def test_criterion_7_nested_triangle_finding(verdict):
    start = time.perf_counter()
    wrong = {"3527": 0, "97": 0}
    positives = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        G = random_graph(6, (0.3, 0.5, 0.7)[seed % 3], rng)
        truth = has_triangle(G) is not None
        positives += truth
        wrong["3527"] += triangle_nested_3527(G, TriangleParams(r=3, s=F(1, 3)), rng=rng, target_error=1e-3) != truth
        wrong["97"] += triangle_nested_97(G, TriangleParams(r1=2, r2=2), rng=rng, target_error=1e-3) != truth
    elapsed = time.perf_counter() - start
    ok = wrong == {"3527": 0, "97": 0} and elapsed < 600
    verdict(7, ok, f"200 graphs ({positives} with a triangle): disagreements {wrong} in {elapsed:.1f}s")
    assert ok


def _collision_instance(seed):
    rng = np.random.default_rng(seed)
    mask = rng.random((3, 3)) < rng.uniform(0.2, 0.8)
    G = Graph.from_edges(6, [(i, 3 + j) for i in range(3) for j in range(3) if mask[i, j]])
    return G, [int(b) for b in rng.integers(0, 2, 6)], rng


def test_criterion_8_graph_collision(verdict):
    start = time.perf_counter()
    wrong = positives = 0
    counts = set()
    for seed in range(500):
        G, bits, rng = _collision_instance(seed)
        truth = has_graph_collision(G, Marking.from_bits(bits)) is not None
        positives += truth
        wrong += graph_collision_walk(G, bits, 2, rng=rng, target_error=1e-3) != truth
        o = QueryOracle(bits)
        spec = collision_walk_spec(G, 3, 3, 2, o)
        state = build_setup_state(spec, o)
        setup = o.count
        apply(apply_update(spec, o), state)
        counts.add((setup, o.count - setup))
    elapsed = time.perf_counter() - start
    ok = wrong == 0 and counts == {(4, 4)} and elapsed < 300
    verdict(8, ok, f"500 instances ({positives} with a collision): {wrong} disagreements; "
                   f"(setup, update) queries {sorted(counts)} in {elapsed:.1f}s")
    assert ok


def test_criterion_9_mss_query_counts(verdict):
    start = time.perf_counter()
    seen = set()
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 8))
        r = int(rng.integers(2, n - 1))
        G = random_graph(n, 0.5, rng)
        o = QueryOracle(G.bits)
        spec = mss_spec(n, r, o)
        state = build_setup_state(spec, o)
        setup = o.count
        assert setup == math.comb(r, 2)
        apply(apply_update(spec, o), state)
        assert o.count - setup == 2 * (r - 1)
        seen.add((n, r))
    elapsed = time.perf_counter() - start
    ok = elapsed < 60
    verdict(9, ok, f"setup C(r,2) and update 2(r-1) exact in 50 runs over (n, r) in {sorted(seen)} "
                   f"in {elapsed:.2f}s")
    assert ok


def test_criterion_10_nesting_contract(verdict):
    start = time.perf_counter()
    specs = [(f"toy3 {bits}", compose_k_level(toy_three_level(QueryOracle(bits))))
             for bits in itertools.product([0, 1], repeat=6)]
    specs += _nesting_specs(seed=0, graphs=10)
    violations = 0
    worst = 0.0
    for _, spec in specs:
        violations += len(witness_violations(spec))
        worst = max(worst, update_deviation(spec))
    for seed in range(10):
        G = random_graph(6, 0.5, np.random.default_rng(100 + seed))
        for spec in (nested_3527_spec(6, TriangleParams(r=3), QueryOracle(G.bits)),
                     nested_97_spec(6, TriangleParams(r1=2, r2=2), QueryOracle(G.bits))):
            violations += len(witness_violations(spec))
            worst = max(worst, update_deviation(spec))
            specs.append(("graph", spec))
    elapsed = time.perf_counter() - start
    ok = violations == 0 and worst <= 1e-9 and elapsed < 120
    verdict(10, ok, f"{len(specs)} composed walks: {violations} witness violations, "
                    f"max inner-state transport deviation {worst:.1e} in {elapsed:.1f}s")
    assert ok
