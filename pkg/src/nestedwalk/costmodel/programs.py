"""Subgraph-detection programs and their nested-walk costs.

A program loads the vertices and edges of a pattern graph ``H`` one
instruction at a time.  Every instruction after ``setup`` is a walk nested
inside the previous one, so its local cost is paid once per marked-state
round of every earlier walk:

    cost = sum_t (prod_{t' < t} global_t') * local_t

Parameters are vertex-set sizes ``r_i = n^rho_i`` and average degrees
``d_ij = n^phi_ij``.  All costs are exponents (see :mod:`.expr`).

========================  ==========================  ==============================
instruction               global cost                 local cost
========================  ==========================  ==============================
``setup``                 1                           sum_ij min(r_i, r_j) d_ij
``loadvertex i``          sqrt(n / r_i)               sqrt(n) sum_j d_ij min(1, r_j/r_i)
``loadedge i j``          sqrt(max(r_i, r_j)/d_ij)    sqrt(r_i r_j)
========================  ==========================  ==============================
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from ..exceptions import InfeasibleError, InputError, ParseError
from .expr import Affine, CostExpr, Switch, Term, as_fraction, const, exp_max, exp_min, var
from .lp import Constraint, Disjunction, Optimum, check_assignment, ge, le, optimize_exponents

__all__ = [
    "SETUP",
    "SubgraphProgram",
    "parse_program",
    "format_program",
    "valid_orderings",
    "instruction_costs",
    "evaluate_program",
    "program_constraints",
    "lg_hyp_violations",
    "optimize_program",
    "edge_local_cost_comparison",
]

SETUP = ("setup",)


def _edge(i, j):
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class SubgraphProgram:
    """Pattern edges on vertices ``0..k-1`` and an instruction order.

    Instructions are ``("setup",)``, ``("loadvertex", i)`` and
    ``("loadedge", i, j)`` with 0-based vertices.  ``params`` optionally
    fixes the exponents (keys as in :meth:`rho` and :meth:`phi`).
    """

    k: int
    edges: tuple
    instructions: tuple
    params: Optional[Mapping[str, Fraction]] = None

    def __post_init__(self):
        edges = tuple(sorted({_edge(int(a), int(b)) for a, b in self.edges}))
        for a, b in edges:
            if a == b or not (0 <= a < self.k and 0 <= b < self.k):
                raise InputError(f"bad pattern edge ({a + 1}, {b + 1})")
        object.__setattr__(self, "edges", edges)
        ins = tuple(self._norm(t) for t in self.instructions)
        object.__setattr__(self, "instructions", ins)
        if self.params is not None:
            object.__setattr__(self, "params", {k: as_fraction(v) for k, v in self.params.items()})
        self._validate()

    @staticmethod
    def _norm(t):
        t = tuple(t)
        if t[0] == "loadedge":
            return ("loadedge",) + _edge(int(t[1]), int(t[2]))
        if t[0] == "loadvertex":
            return ("loadvertex", int(t[1]))
        if t[0] == "setup" and len(t) == 1:
            return SETUP
        raise InputError(f"unknown instruction {t!r}")

    def _validate(self):
        ins = self.instructions
        if not ins or ins[0] != SETUP:
            raise InputError("a program must start with setup")
        if ins.count(SETUP) != 1:
            raise InputError("setup must appear exactly once")
        expected = {("loadvertex", i) for i in range(self.k)} | {("loadedge",) + e for e in self.edges}
        if len(ins) != len(expected) + 1 or set(ins[1:]) != expected:
            raise InputError("every vertex and edge of the pattern must be loaded exactly once")
        seen = set()
        for t in ins[1:]:
            if t[0] == "loadedge" and not {t[1], t[2]} <= seen:
                raise InputError(f"loadedge {t[1] + 1} {t[2] + 1} comes before both endpoints are loaded")
            if t[0] == "loadvertex":
                seen.add(t[1])

    @property
    def tau(self):
        return len(self.instructions)

    def rho(self, i):
        return f"rho{i + 1}"

    def phi(self, i, j):
        a, b = _edge(i, j)
        return f"phi{a + 1}{b + 1}" if self.k < 10 else f"phi{a + 1}_{b + 1}"

    def neighbours(self, i):
        return [b if a == i else a for a, b in self.edges if i in (a, b)]

    def variables(self):
        return [self.rho(i) for i in range(self.k)] + [self.phi(a, b) for a, b in self.edges]

    def with_instructions(self, instructions):
        return SubgraphProgram(self.k, self.edges, instructions, self.params)

    def with_params(self, params):
        return SubgraphProgram(self.k, self.edges, self.instructions, params)


def valid_orderings(k, edges):
    """Every valid program for the pattern, in lexicographic order."""
    edges = sorted({_edge(a, b) for a, b in edges})
    items = [("loadvertex", i) for i in range(k)] + [("loadedge",) + e for e in edges]
    out = []

    def extend(prefix, loaded, left):
        if not left:
            out.append((SETUP,) + tuple(prefix))
            return
        for idx, t in enumerate(left):
            if t[0] == "loadedge" and not {t[1], t[2]} <= loaded:
                continue
            nxt = loaded | {t[1]} if t[0] == "loadvertex" else loaded
            extend(prefix + [t], nxt, left[:idx] + left[idx + 1:])

    extend([], frozenset(), items)
    return out


# --------------------------------------------------------------------------
# file format


_HEADER = re.compile(r"^\s*H\s*:\s*(\d+)((?:\s+\d+\s*-\s*\d+)*)\s*$", re.IGNORECASE)


def parse_program(text: str) -> SubgraphProgram:
    """Parse ``H: k u-v ...`` followed by one instruction per line (1-based)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError("empty program")
    m = _HEADER.match(lines[0])
    if not m:
        raise ParseError(f"bad pattern header {lines[0]!r}; expected 'H: k u1-v1 u2-v2 ...'")
    k = int(m.group(1))
    edges = []
    for a, b in re.findall(r"(\d+)\s*-\s*(\d+)", m.group(2)):
        edges.append((int(a) - 1, int(b) - 1))
    ins = []
    for ln in lines[1:]:
        parts = ln.lower().split()
        try:
            if parts == ["setup"]:
                ins.append(SETUP)
            elif parts[0] == "loadvertex" and len(parts) == 2:
                ins.append(("loadvertex", int(parts[1]) - 1))
            elif parts[0] == "loadedge" and len(parts) == 3:
                ins.append(("loadedge", int(parts[1]) - 1, int(parts[2]) - 1))
            else:
                raise ValueError
        except ValueError:
            raise ParseError(f"bad instruction {ln!r}") from None
    try:
        return SubgraphProgram(k, edges, ins)
    except InputError as exc:
        raise ParseError(str(exc)) from None


def format_program(p: SubgraphProgram) -> str:
    head = "H: %d %s" % (p.k, " ".join(f"{a + 1}-{b + 1}" for a, b in p.edges))
    body = []
    for t in p.instructions:
        if t == SETUP:
            body.append("setup")
        elif t[0] == "loadvertex":
            body.append(f"loadvertex {t[1] + 1}")
        else:
            body.append(f"loadedge {t[1] + 1} {t[2] + 1}")
    return "\n".join([head.rstrip()] + body) + "\n"


# --------------------------------------------------------------------------
# costs


def _edge_local(p, i, j, convention):
    ri, rj = var(p.rho(i)), var(p.rho(j))
    mean = (ri + rj) / 2
    if convention == "sqrt":
        return Term(mean)
    if convention != "lms":
        raise InputError(f"unknown edge-local convention {convention!r}")
    # max(r_i, r_j) when d_ij min(r_i, r_j) >= max(r_i, r_j), else sqrt(r_i r_j)
    f = var(p.phi(i, j))
    table = {}
    for a in (True, False):
        for bi in (True, False):
            for bj in (True, False):
                if a:
                    table[(a, bi, bj)] = ri if bi else mean
                else:
                    table[(a, bi, bj)] = rj if bj else mean
    sw = Switch((ri - rj, f + rj - ri, f + ri - rj), table)
    return Term(Affine(), ((1, sw),))


def instruction_costs(p: SubgraphProgram, convention="sqrt"):
    """``(global, [local alternatives])`` exponent terms for each instruction.

    A local cost that is a sum over edges is returned as a list of terms
    whose maximum is its leading order.
    """
    out = []
    for t in p.instructions:
        if t == SETUP:
            local = [exp_min(var(p.rho(a)), var(p.rho(b))) + var(p.phi(a, b)) for a, b in p.edges]
            out.append((Term(0), local or [Term(0)]))
        elif t[0] == "loadvertex":
            i = t[1]
            ri = var(p.rho(i))
            g = Term((1 - ri) / 2)
            local = [
                Term(const(Fraction(1, 2)) + var(p.phi(i, j))) + exp_min(0, var(p.rho(j)) - ri)
                for j in p.neighbours(i)
            ]
            out.append((g, local or [Term(Fraction(1, 2))]))
        else:
            _, i, j = t
            g = (exp_max(var(p.rho(i)), var(p.rho(j))) - var(p.phi(i, j))) * Fraction(1, 2)
            out.append((g, [_edge_local(p, i, j, convention)]))
    return out


def evaluate_program(p: SubgraphProgram, convention="sqrt") -> CostExpr:
    """Leading-order cost ``sum_t (prod_{t'<t} g_t') l_t`` as a cost expression.

    If the program carries fixed ``params`` they must satisfy the
    parameter constraints, otherwise :class:`InfeasibleError` is raised.
    """
    if p.params is not None:
        cons, disj = program_constraints(p)
        bad = check_assignment(cons, disj, p.params)
        if bad:
            raise InfeasibleError("program parameters violate their constraints", bad)
    terms = []
    prefix = Term(0)
    for idx, (g, locals_) in enumerate(instruction_costs(p, convention)):
        name = _label(p.instructions[idx])
        for loc in locals_:
            terms.append((prefix + loc).with_label(name))
        prefix = prefix + g
    return CostExpr(terms)


def _label(t):
    if t == SETUP:
        return "setup"
    if t[0] == "loadvertex":
        return f"loadvertex {t[1] + 1}"
    return f"loadedge {t[1] + 1} {t[2] + 1}"


def program_constraints(p: SubgraphProgram):
    """Parameter constraints ``(constraints, disjunctions)`` in exponent form.

    ``1 <= r_i <= n``, ``1 <= d_ij <= max(r_i, r_j)`` and, for every
    vertex ``i``, some neighbour ``j`` with ``d_ij r_j / r_i >= 1``.
    """
    cons, disj = [], []
    for i in range(p.k):
        r = var(p.rho(i))
        cons += [ge(r, 0, f"{p.rho(i)} >= 0"), le(r, 1, f"{p.rho(i)} <= 1")]
    for a, b in p.edges:
        f = var(p.phi(a, b))
        cons.append(ge(f, 0, f"{p.phi(a, b)} >= 0"))
        cons.append(le(Term(f), exp_max(var(p.rho(a)), var(p.rho(b))),
                       f"{p.phi(a, b)} <= max({p.rho(a)}, {p.rho(b)})"))
    for i in range(p.k):
        opts = tuple(
            Constraint(var(p.phi(i, j)) + var(p.rho(j)) - var(p.rho(i)), ">=",
                       f"{p.phi(i, j)} + {p.rho(j)} - {p.rho(i)} >= 0")
            for j in p.neighbours(i)
        )
        name = f"vertex {i + 1} has a neighbour j with d_ij r_j >= r_i"
        if not opts:
            # no neighbour can ever satisfy it: an always-false constraint
            opts = (Constraint(Affine({}, -1), ">=", name),)
        disj.append(Disjunction(opts, name))
    return cons, disj


def lg_hyp_violations(p: SubgraphProgram, params=None, exact=False):
    """Vertices (1-based) for which no neighbour satisfies the degree condition.

    In exponent form the test is ``phi_ij + rho_j - rho_i >= 0``.  With
    ``exact=True`` and ``params`` holding real sizes ``{"n": .., "r": [...],
    "d": {(i, j): ..}}`` the condition ``d_ij (2 r_j + 1)/(2 r_i + 1) >= 1``
    is checked instead.
    """
    bad = []
    if exact:
        r, d = params["r"], params["d"]
        for i in range(p.k):
            ok = any(d[_edge(i, j)] * (2 * r[j] + 1) / (2 * r[i] + 1) >= 1 for j in p.neighbours(i))
            if not ok:
                bad.append(i + 1)
        return bad
    params = params if params is not None else p.params
    for i in range(p.k):
        ok = any(
            params[p.phi(i, j)] + params[p.rho(j)] - params[p.rho(i)] >= 0 for j in p.neighbours(i)
        )
        if not ok:
            bad.append(i + 1)
    return bad


def optimize_program(p: SubgraphProgram, convention="sqrt") -> Optimum:
    """Optimal exponent of the program over all feasible parameters."""
    expr = evaluate_program(p.with_params(None), convention)
    cons, disj = program_constraints(p)
    return optimize_exponents(expr, cons, disj, tie_break=p.variables())


def edge_local_cost_comparison(p: SubgraphProgram, params=None):
    """Compare the ``sqrt(r_i r_j)`` edge-local cost with the conditional one.

    The conditional convention charges ``max(r_i, r_j)`` whenever
    ``d_ij min(r_i, r_j) >= max(r_i, r_j)``.  With ``params`` both costs
    are evaluated there; otherwise both programs are optimised.
    """
    base = p.with_params(None)
    report = {"edges": [f"{a + 1}-{b + 1}" for a, b in p.edges]}
    if params is not None:
        params = {k: as_fraction(v) for k, v in params.items()}
        ours = evaluate_program(base, "sqrt")(params)
        theirs = evaluate_program(base, "lms")(params)
        report.update(mode="evaluate", assignment={k: str(v) for k, v in params.items()})
    else:
        a, b = optimize_program(base, "sqrt"), optimize_program(base, "lms")
        ours, theirs = a.value, b.value
        report.update(
            mode="optimize",
            assignment={k: str(v) for k, v in a.assignment.items()},
            assignment_conditional={k: str(v) for k, v in b.assignment.items()},
        )
    report.update(
        sqrt_exponent=str(ours),
        conditional_exponent=str(theirs),
        strict_improvement=bool(ours < theirs),
    )
    return report
