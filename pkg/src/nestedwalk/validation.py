"""Invariant suites run by ``nestedwalk verify`` and by the test-suite.

Each suite returns a list of :class:`Check` records; a suite passes when
every record does.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import comb

import numpy as np

from . import _rng
from .algorithms import TriangleParams, collision_walk_spec, mss_spec, nested_3527_spec, nested_97_spec
from .graphs import Graph, random_graph
from .hilbert import apply
from .markov import johnson_chain, spectral_gap
from .nested import (
    compose_k_level,
    markov_budget,
    random_truncation_instance,
    toy_three_level,
    truncation_overlap,
    update_deviation,
    witness_violations,
)
from .oracle import QueryOracle
from .walk import apply_update, build_setup_state

__all__ = ["Check", "SUITES", "run_suite", "markov_suite", "lemma_suite", "nesting_suite", "counting_suite"]


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    detail: dict

    def as_dict(self):
        return asdict(self)


def markov_suite(seed=0, max_n=10):
    """Johnson-graph gaps against the closed form ``n / (r (n - r))``."""
    out = []
    for n in range(2, max_n + 1):
        for r in range(1, n):
            gap = spectral_gap(johnson_chain(n, r))
            want = n / (r * (n - r))
            out.append(Check("markov", f"J({n},{r})", abs(gap - want) <= 1e-9,
                             {"gap": gap, "closed_form": want, "difference": gap - want}))
    return out


def lemma_suite(seed=0, instances=100, k=7.0):
    """Truncated controlled unitaries on random instances.

    Checks ``Re<Us|Ũs> >= 1 - 2 w`` (``w`` the dropped branch weight) and
    that the Markov budget ``ceil(k * mean cost)`` drops weight at most
    ``1/k``.  Whether the tighter ``1 - w`` also holds is reported but not
    required: it can fail when a dropped branch rotates its state.
    """
    rng = _rng.stream(seed, "lemma")
    out = []
    tight_holds = 0
    for idx in range(instances):
        inst, states = random_truncation_instance(rng)
        overlap, w = truncation_overlap(inst, states)
        tight_holds += overlap >= 1 - w - 1e-9
        out.append(Check("lemma", f"overlap[{idx}]", overlap >= 1 - 2 * w - 1e-9,
                         {"overlap": overlap, "dropped_weight": w, "bound": 1 - 2 * w}))
        q, predicted = markov_budget(inst, k)
        dropped = float(inst.weights[inst.costs > q].sum())
        out.append(Check("lemma", f"markov[{idx}]", predicted <= 1 / k + 1e-12 and dropped <= predicted + 1e-12,
                         {"budget": q, "predicted_error": predicted, "dropped_weight": dropped}))
    out.append(Check("lemma", "tight-bound-count", True,
                     {"holds": int(tight_holds), "instances": instances}))
    return out


def _nesting_specs(seed, graphs=3):
    rng = _rng.stream(seed, "nesting")
    specs = []
    for bits in ([1, 1, 0, 1, 0, 0], [0, 0, 0, 0, 0, 0], [1, 0, 1, 0, 1, 1]):
        o = QueryOracle(bits)
        specs.append((f"toy3{''.join(map(str, bits))}", compose_k_level(toy_three_level(o))))
    for g in range(graphs):
        G = random_graph(6, 0.5, rng)
        o = QueryOracle(G.bits)
        specs.append((f"3527[{g}]", nested_3527_spec(6, TriangleParams(r=3), o)))
        specs.append((f"97[{g}]", nested_97_spec(6, TriangleParams(r1=2, r2=2), o)))
    return specs


def nesting_suite(seed=0, graphs=3):
    """Witness consistency and exact inner-state transport for composed walks."""
    out = []
    for name, spec in _nesting_specs(seed, graphs):
        bad = witness_violations(spec)
        dev = update_deviation(spec)
        out.append(Check("nesting", f"witness {name}", not bad, {"violations": [str(b) for b in bad]}))
        out.append(Check("nesting", f"transport {name}", dev <= 1e-9, {"max_deviation": dev}))
    return out


def counting_suite(seed=0, runs=10, n=6, r=3, m=2):
    """Oracle counters for setup and one update, against the declared conventions."""
    rng = _rng.stream(seed, "counting")
    out = []
    for idx in range(runs):
        G = random_graph(n, 0.5, rng)
        o = QueryOracle(G.bits)
        spec = mss_spec(n, r, o)
        state = build_setup_state(spec, o)
        setup = o.count
        apply(apply_update(spec, o), state)
        update = o.count - setup
        ok = setup == comb(r, 2) and update == 2 * (r - 1)
        out.append(Check("counting", f"mss[{idx}]", ok,
                         {"setup": setup, "expected_setup": comb(r, 2),
                          "update": update, "expected_update": 2 * (r - 1)}))
        adj = np.zeros((6, 6), dtype=bool)
        mask = rng.random((3, 3)) < 0.5
        adj[:3, 3:] = mask
        adj[3:, :3] = mask.T
        mk = QueryOracle([int(b) for b in rng.integers(0, 2, 6)])
        gspec = collision_walk_spec(Graph(adj), 3, 3, m, mk)
        state = build_setup_state(gspec, mk)
        setup = mk.count
        apply(apply_update(gspec, mk), state)
        update = mk.count - setup
        out.append(Check("counting", f"collision[{idx}]", setup == 2 * m and update == 4,
                         {"setup": setup, "expected_setup": 2 * m, "update": update, "expected_update": 4}))
    return out


SUITES = {
    "markov": markov_suite,
    "lemma": lemma_suite,
    "nesting": nesting_suite,
    "counting": counting_suite,
}


def run_suite(name, seed=0):
    if name == "all":
        out = []
        for fn in SUITES.values():
            out.extend(fn(seed=seed))
        return out
    return SUITES[name](seed=seed)
