"""Exact minimisation of a maximum of affine exponents.

``min_x max_t term_t(x)`` subject to affine constraints is the linear
program ``min z  s.t.  z >= term_t(x)``.  It is solved with a two-phase
tableau simplex over :class:`fractions.Fraction` using Bland's rule, so
optima such as ``35/27`` come out exactly.  Switch atoms and disjunctive
constraints are handled by enumerating cases; HiGHS (through
:func:`scipy.optimize.linprog`) screens the cases in floating point and
only the competitive ones are solved exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from ..exceptions import InfeasibleError, InputError
from .expr import Affine, CostExpr, Term, as_fraction

__all__ = [
    "Constraint",
    "Disjunction",
    "ge",
    "le",
    "eq",
    "LPResult",
    "solve_lp",
    "Optimum",
    "optimize_exponents",
    "infeasible_subset",
    "check_assignment",
]

_SCREEN_TOL = 1e-7


@dataclass(frozen=True)
class Constraint:
    """``expr >= 0`` (``sense='>='``), ``expr <= 0`` or ``expr == 0``.

    ``expr`` may be a :class:`~.expr.Term` with switches; it is made affine
    per case by :meth:`resolve`.
    """

    expr: object
    sense: str = ">="
    name: str = ""

    def __post_init__(self):
        if self.sense not in (">=", "<=", "=="):
            raise InputError(f"unknown constraint sense {self.sense!r}")

    def pivots(self):
        return self.expr.pivots() if isinstance(self.expr, Term) else set()

    def variables(self):
        if isinstance(self.expr, Term):
            return CostExpr([self.expr]).variables
        return self.expr.variables

    def resolve(self, orient):
        if isinstance(self.expr, Term):
            return Constraint(self.expr.resolve(orient), self.sense, self.name)
        return self

    def holds(self, assignment, tol=0):
        v = self.expr(assignment)
        if self.sense == ">=":
            return v >= -tol
        if self.sense == "<=":
            return v <= tol
        return abs(v) <= tol

    def __str__(self):
        return self.name or f"{self.expr} {self.sense} 0"


def _diff(a, b):
    if isinstance(a, Term) or isinstance(b, Term):
        return Term.lift(a) - Term.lift(b)
    return Affine.lift(a) - Affine.lift(b)


def ge(a, b, name=""):
    return Constraint(_diff(a, b), ">=", name or f"{a} >= {b}")


def le(a, b, name=""):
    return Constraint(_diff(a, b), "<=", name or f"{a} <= {b}")


def eq(a, b, name=""):
    return Constraint(_diff(a, b), "==", name or f"{a} == {b}")


@dataclass(frozen=True)
class Disjunction:
    """At least one of ``options`` must hold."""

    options: tuple
    name: str = ""


# --------------------------------------------------------------------------
# exact simplex


@dataclass
class LPResult:
    status: str                      # "optimal", "infeasible" or "unbounded"
    value: Optional[Fraction] = None
    x: Optional[list] = None


def _pivot(T, r, c):
    row = T[r]
    p = row[c]
    if p != 1:
        T[r] = row = [v / p for v in row]
    for i, other in enumerate(T):
        if i != r:
            f = other[c]
            if f:
                T[i] = [a - f * b for a, b in zip(other, row)]


def _simplex(T, basis, ncols, allowed):
    """Minimise the objective in the last row of ``T`` (Bland's rule)."""
    obj = T[-1]
    while True:
        obj = T[-1]
        entering = next((j for j in range(ncols) if allowed[j] and obj[j] < 0), None)
        if entering is None:
            return "optimal"
        best, leave = None, None
        for i in range(len(T) - 1):
            a = T[i][entering]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return "unbounded"
        _pivot(T, leave, entering)
        basis[leave] = entering


def solve_lp(c, rows, senses, rhs) -> LPResult:
    """Minimise ``c.x`` over free ``x`` subject to ``row.x (sense) rhs``.

    All inputs are converted to :class:`Fraction`; the answer is exact.
    """
    n = len(c)
    c = [as_fraction(v) for v in c]
    m = len(rows)
    # free variables split as x = p - q
    A, b, s = [], [], []
    for row, sense, r in zip(rows, senses, rhs):
        row = [as_fraction(v) for v in row]
        full = row + [-v for v in row]
        r = as_fraction(r)
        if r < 0:
            full, r = [-v for v in full], -r
            sense = {">=": "<=", "<=": ">=", "==": "=="}[sense]
        A.append(full)
        b.append(r)
        s.append(sense)
    nslack = sum(sense != "==" for sense in s)
    nart = sum(sense != "<=" for sense in s)
    width = 2 * n + nslack + nart
    T, basis = [], []
    slack_at = 2 * n
    art_at = 2 * n + nslack
    art_cols = []
    for i in range(m):
        row = A[i] + [Fraction(0)] * (nslack + nart) + [b[i]]
        if s[i] == "<=":
            row[slack_at] = Fraction(1)
            basis.append(slack_at)
            slack_at += 1
        else:
            if s[i] == ">=":
                row[slack_at] = Fraction(-1)
                slack_at += 1
            row[art_at] = Fraction(1)
            basis.append(art_at)
            art_cols.append(art_at)
            art_at += 1
        T.append(row)
    # phase one: minimise the sum of artificials
    phase1 = [Fraction(0)] * (width + 1)
    for i in range(m):
        if basis[i] in art_cols:
            phase1 = [a - v for a, v in zip(phase1, T[i])]
    for j in art_cols:
        phase1[j] = Fraction(0)
    T.append(phase1)
    allowed = [True] * width
    _simplex(T, basis, width, allowed)
    if T[-1][-1] != 0:
        return LPResult("infeasible")
    T.pop()
    # drive remaining artificials out of the basis
    for i in range(m):
        if basis[i] in art_cols:
            j = next((j for j in range(2 * n + nslack) if T[i][j] != 0), None)
            if j is not None:
                _pivot(T, i, j)
                basis[i] = j
    for j in art_cols:
        allowed[j] = False
    objective = c + [-v for v in c] + [Fraction(0)] * (nslack + nart) + [Fraction(0)]
    for i in range(m):
        f = objective[basis[i]]
        if f:
            objective = [a - f * v for a, v in zip(objective, T[i])]
    T.append(objective)
    status = _simplex(T, basis, width, allowed)
    if status == "unbounded":
        return LPResult("unbounded")
    values = [Fraction(0)] * width
    for i in range(m):
        values[basis[i]] = T[i][-1]
    x = [values[j] - values[n + j] for j in range(n)]
    return LPResult("optimal", sum((a * v for a, v in zip(c, x)), Fraction(0)), x)


# --------------------------------------------------------------------------
# constraint bookkeeping


def _matrix(constraints, names):
    idx = {v: i for i, v in enumerate(names)}
    rows, senses, rhs = [], [], []
    for con in constraints:
        row = [Fraction(0)] * len(names)
        for k, v in con.expr.coeffs.items():
            row[idx[k]] = v
        rows.append(row)
        senses.append(con.sense)
        rhs.append(-con.expr.const)
    return rows, senses, rhs


def _float_lp(c, rows, senses, rhs):
    """HiGHS solution ``(value, x, y)`` or ``None`` when infeasible or unbounded.

    ``y`` holds the multipliers of the rows written as ``a.x >= b``
    (``<=`` rows negated), so ``c = sum_i y_i a_i`` with ``y_i >= 0`` on
    inequality rows.
    """
    n = len(c)
    A_ub, b_ub, A_eq, b_eq, where = [], [], [], [], []
    for row, sense, r in zip(rows, senses, rhs):
        row = [float(v) for v in row]
        if sense == "<=":
            where.append(("ub", len(A_ub)))
            A_ub.append(row); b_ub.append(float(r))
        elif sense == ">=":
            where.append(("ub", len(A_ub)))
            A_ub.append([-v for v in row]); b_ub.append(-float(r))
        else:
            where.append(("eq", len(A_eq)))
            A_eq.append(row); b_eq.append(float(r))
    res = linprog(
        [float(v) for v in c],
        A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
        A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None,
        bounds=[(None, None)] * n, method="highs",
    )
    if res.status != 0:
        return None
    y = []
    for kind, k in where:
        if kind == "ub":
            y.append(-float(res.ineqlin.marginals[k]))
        else:
            y.append(float(res.eqlin.marginals[k]))
    return res.fun, res.x, y


def _float_screen(c, rows, senses, rhs):
    out = _float_lp(c, rows, senses, rhs)
    return None if out is None else out[0]


def _rational(v, denom=10**6):
    return Fraction(float(v)).limit_denominator(denom)


def _certify(c, rows, senses, rhs, x_float, y_float):
    """Exact optimum from a floating-point primal/dual pair, or ``None``.

    Both vectors are rounded to nearby rationals.  The pair is accepted
    only if, in exact arithmetic, ``x`` is feasible, ``y`` is dual
    feasible and the two objectives coincide, which proves optimality.
    """
    c = [as_fraction(v) for v in c]
    x = [_rational(v) for v in x_float]
    G = []
    for row, sense, r in zip(rows, senses, rhs):
        row = [as_fraction(v) for v in row]
        r = as_fraction(r)
        if sense == "<=":
            G.append(([-v for v in row], -r, False))
        else:
            G.append((row, r, sense == "=="))
    for a, b, is_eq in G:
        val = sum((ai * xi for ai, xi in zip(a, x)), Fraction(0))
        if val < b or (is_eq and val != b):
            return None
    primal = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    for eq_sign in (1, -1):
        y = [_rational(v) * (eq_sign if g[2] else 1) for v, g in zip(y_float, G)]
        if any(yi < 0 and not g[2] for yi, g in zip(y, G)):
            return None
        ok = all(
            sum((yi * g[0][j] for yi, g in zip(y, G)), Fraction(0)) == c[j] for j in range(len(c))
        )
        if ok and sum((yi * g[1] for yi, g in zip(y, G)), Fraction(0)) == primal:
            return primal, x
    return None


def _exact_min(c, rows, senses, rhs):
    """Exact ``(value, x)`` of a bounded LP: certified HiGHS answer, else the rational simplex."""
    fl = _float_lp(c, rows, senses, rhs)
    if fl is not None:
        cert = _certify(c, rows, senses, rhs, fl[1], fl[2])
        if cert is not None:
            return cert
    res = solve_lp(c, rows, senses, rhs)
    if res.status == "unbounded":
        raise InputError("cost is unbounded below; add bounds on the exponent variables")
    if res.status != "optimal":
        return None
    return res.value, res.x


def _feasible(constraints, names):
    rows, senses, rhs = _matrix(constraints, names)
    if not rows:
        return True
    return solve_lp([0] * len(names), rows, senses, rhs).status != "infeasible"


def infeasible_subset(constraints: Sequence[Constraint], names=None):
    """Deletion filter: a minimal infeasible subset of ``constraints``.

    Returns an empty list when the constraints are feasible.
    """
    constraints = list(constraints)
    if names is None:
        names = sorted({k for con in constraints for k in con.expr.coeffs})
    if _feasible(constraints, names):
        return []
    keep = list(constraints)
    for con in list(constraints):
        trial = [k for k in keep if k is not con]
        if not _feasible(trial, names):
            keep = trial
    return keep


def check_assignment(constraints, disjunctions, assignment):
    """Names of constraints (and disjunctions) that ``assignment`` violates."""
    bad = [str(c) for c in constraints if not c.holds(assignment)]
    for d in disjunctions:
        if not any(o.holds(assignment) for o in d.options):
            bad.append(d.name or " or ".join(str(o) for o in d.options))
    return bad


# --------------------------------------------------------------------------
# min-max optimisation


@dataclass
class Optimum:
    """Optimal exponent ``value`` attained at ``assignment``."""

    value: Fraction
    assignment: dict
    expr: CostExpr
    binding: list = field(default_factory=list)
    case: tuple = ()

    def term_values(self):
        return [t(self.assignment) for t in self.expr.terms]

    def as_dict(self):
        return {
            "optimal_exponent": str(self.value),
            "optimal_exponent_float": float(self.value),
            "assignment": {k: str(v) for k, v in self.assignment.items()},
            "terms": [
                {"term": str(t), "exponent": str(v), **({"source": t.label} if t.label else {})}
                for t, v in zip(self.expr.terms, self.term_values())
            ],
        }


def _cases(pivots, constraints, disjunctions, names):
    pivots = tuple(sorted(pivots, key=str))
    return _cached_cases(pivots, tuple(constraints), tuple(disjunctions), tuple(names))


@lru_cache(maxsize=256)
def _cached_cases(pivots, constraints, disjunctions, names):
    """Feasible ``(orientation, constraints)`` cases, found depth first.

    Each pivot sign and each disjunct choice is a branch; a branch whose
    constraints are already infeasible (checked with HiGHS) is pruned, and
    a disjunction with an option implied by the current constraints is
    not split at all.
    """
    zero = [0] * len(names)

    def feasible(cons):
        rows, senses, rhs = _matrix(cons, names)
        return not rows or _float_screen(zero, rows, senses, rhs) is not None

    def implied(cons, opt):
        rows, senses, rhs = _matrix(cons, names)
        idx = {v: i for i, v in enumerate(names)}
        sign = 1 if opt.sense == ">=" else -1
        c = [0] * len(names)
        for k, v in opt.expr.coeffs.items():
            c[idx[k]] = float(v) * sign
        lo = _float_screen(c, rows, senses, rhs) if rows else None
        return opt.sense != "==" and lo is not None and lo + sign * float(opt.expr.const) >= -1e-12

    out = []

    def pick(k, cons, orient):
        if k == len(disjunctions):
            out.append((dict(orient), cons))
            return
        opts = disjunctions[k].options
        hit = next((o for o in opts if implied(cons, o)), None)
        for o in ([hit] if hit is not None else opts):
            trial = cons + [o]
            if hit is not None or feasible(trial):
                pick(k + 1, trial, orient)

    def orient_walk(k, orient):
        if k == len(pivots):
            cons = [c.resolve(orient) for c in constraints]
            cons += [
                Constraint(p, ">=" if sg else "<=", f"case {p} {'>=' if sg else '<='} 0")
                for p, sg in orient.items()
            ]
            if feasible(cons):
                pick(0, cons, orient)
            return
        for sign in (True, False):
            orient[pivots[k]] = sign
            partial = [
                Constraint(p, ">=" if sg else "<=") for p, sg in orient.items()
            ]
            if feasible(partial):
                orient_walk(k + 1, orient)
            del orient[pivots[k]]

    orient_walk(0, {})
    return tuple(out)


def optimize_exponents(expr, constraints=(), disjunctions=(), tie_break=None) -> Optimum:
    """Minimise ``max_t term_t`` over the exponent variables.

    Ties between optimal points are broken by maximising the variables in
    ``tie_break`` order (default: order of first appearance in ``expr``),
    one after another, so the returned vertex is reproducible.  Pass
    ``tie_break=False`` to skip this and return any optimal vertex.
    Raises :class:`InfeasibleError` listing a minimal conflicting subset.
    """
    expr = CostExpr.lift(expr)
    constraints = list(constraints)
    disjunctions = list(disjunctions)
    names = list(expr.variables)
    for con in constraints + [o for d in disjunctions for o in d.options]:
        for k in con.variables():
            if k not in names:
                names.append(k)
    if tie_break is False:
        order = []
    else:
        order = [v for v in (tie_break or names) if v in names]
    pivots = list(expr.pivots())
    for con in constraints:
        for p in sorted(con.pivots(), key=str):
            if p not in pivots:
                pivots.append(p)
    z = "__z"
    allnames = names + [z]
    zvar = Affine({z: 1})
    cobj = [0] * len(names) + [1]

    screened = []
    for orient, cons in _cases(pivots, constraints, disjunctions, names):
        cons = cons + [
            Constraint(zvar - t.resolve(orient), ">=", f"term {i}") for i, t in enumerate(expr.terms)
        ]
        rows, senses, rhs = _matrix(cons, allnames)
        val = _float_screen(cobj, rows, senses, rhs)
        if val is not None:
            screened.append((val, cons))
    if not screened:
        plain = [c for c in constraints if not c.pivots()]
        base = infeasible_subset(plain, names)
        if base:
            raise InfeasibleError("exponent constraints are infeasible", [str(c) for c in base])
        keep = list(disjunctions)
        for d in list(disjunctions):
            trial = [x for x in keep if x is not d]
            if not _cases(pivots, constraints, trial, names):
                keep = trial
        violated = [d.name or "disjunction" for d in keep] or [str(c) for c in constraints]
        raise InfeasibleError("no case of the piecewise constraints is feasible", violated)
    screened.sort(key=lambda vc: vc[0])
    best_float = screened[0][0]
    tied = [cons for v, cons in screened if v <= best_float + _SCREEN_TOL]
    if not order:
        # cases further than the screening tolerance from the best cannot win
        tied = tied[:1]

    exact = []
    for cons in tied:
        got = _exact_min(cobj, *_matrix(cons, allnames))
        if got is not None:
            exact.append((got[0], got[1], cons))
    zstar = min(v for v, _, _ in exact)

    chosen, chosen_key = None, None
    for val, x, cons in exact:
        if val != zstar:
            continue
        fixed = cons + [Constraint(zvar - Affine({}, zstar), "<=", "optimal")]
        point = dict(zip(allnames, x))
        for v in order:
            c = [Fraction(-1) if nm == v else 0 for nm in allnames]
            got = _exact_min(c, *_matrix(fixed, allnames))
            top = -got[0]
            fixed = fixed + [Constraint(Affine({v: 1}) - Affine({}, top), "==", f"fix {v}")]
            point = dict(zip(allnames, got[1]))
        key = tuple(point[v] for v in order)
        if chosen is None or key > chosen_key:
            chosen, chosen_key = point, key
    assignment = {k: chosen[k] for k in names}
    value = expr(assignment)
    if value != zstar:  # certificate: substitution reproduces the optimum
        raise AssertionError(f"LP certificate failed: {value} != {zstar}")
    bad = check_assignment(constraints, disjunctions, assignment)
    if bad:
        raise AssertionError(f"LP optimum violates {bad}")
    binding = [i for i, t in enumerate(expr.terms) if t(assignment) == zstar]
    return Optimum(zstar, assignment, expr, binding)
