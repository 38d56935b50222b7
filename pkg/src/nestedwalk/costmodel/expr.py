"""Exponent arithmetic for leading-order query costs.

Every quantity is written as a power of the input size ``n``; parameters
such as ``r = n^rho`` become variables of an affine exponent.  Products
and quotients turn into sums and differences of exponents, and a sum of
costs is dominated by its largest term, so a cost is the maximum of a
finite set of exponent terms.

A term may also contain :class:`Switch` atoms, used for expressions such
as ``min(r_i, r_j)`` whose exponent is ``min(rho_i, rho_j)``.  A switch
picks an affine value from the signs of its pivots; the LP layer
enumerates the sign patterns so each case is again linear.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping

from ..exceptions import InputError

__all__ = [
    "Affine",
    "Switch",
    "Term",
    "CostExpr",
    "var",
    "const",
    "as_fraction",
    "exp_min",
    "exp_max",
    "cost_single_level",
    "cost_two_level",
    "cost_k_level",
]


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    return Fraction(value)


class Affine:
    """``const + sum coeff * variable`` with rational coefficients."""

    __slots__ = ("coeffs", "const", "_key")

    def __init__(self, coeffs: Mapping[str, object] = (), const=0):
        items = dict(coeffs)
        self.coeffs = {k: as_fraction(v) for k, v in sorted(items.items()) if as_fraction(v) != 0}
        self.const = as_fraction(const)
        self._key = (tuple(self.coeffs.items()), self.const)

    @staticmethod
    def lift(value) -> "Affine":
        if isinstance(value, Affine):
            return value
        return Affine({}, value)

    @property
    def variables(self):
        return tuple(self.coeffs)

    def is_constant(self):
        return not self.coeffs

    def __add__(self, other):
        if isinstance(other, (Term, CostExpr, Switch)):
            return NotImplemented
        other = Affine.lift(other)
        merged = dict(self.coeffs)
        for k, v in other.coeffs.items():
            merged[k] = merged.get(k, 0) + v
        return Affine(merged, self.const + other.const)

    __radd__ = __add__

    def __neg__(self):
        return Affine({k: -v for k, v in self.coeffs.items()}, -self.const)

    def __sub__(self, other):
        if isinstance(other, (Term, CostExpr, Switch)):
            return NotImplemented
        return self + (-Affine.lift(other))

    def __rsub__(self, other):
        return Affine.lift(other) - self

    def __mul__(self, c):
        c = as_fraction(c)
        return Affine({k: v * c for k, v in self.coeffs.items()}, self.const * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / as_fraction(c))

    def __eq__(self, other):
        return isinstance(other, Affine) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __call__(self, assignment: Mapping[str, object]) -> Fraction:
        total = self.const
        for k, v in self.coeffs.items():
            if k not in assignment:
                raise InputError(f"no value given for exponent variable {k!r}")
            total += v * as_fraction(assignment[k])
        return total

    def __repr__(self):
        return f"Affine({self})"

    def __str__(self):
        parts = []
        if self.const != 0 or not self.coeffs:
            parts.append(str(self.const))
        for k, v in self.coeffs.items():
            if v == 1:
                s = k
            elif v == -1:
                s = f"-{k}"
            else:
                s = f"{v}*{k}"
            parts.append(s)
        return " + ".join(parts).replace("+ -", "- ")


def var(name) -> Affine:
    return Affine({name: 1})


def const(value) -> Affine:
    return Affine({}, value)


class Switch:
    """Piecewise-affine exponent selected by the signs of one or more pivots.

    ``table`` maps a tuple of booleans (``pivot >= 0`` for each pivot, in
    order) to the affine exponent used on that region.  Each region is
    treated as closed by the optimiser, so a switch that jumps on a
    boundary is optimised as its lower envelope there.  Pivots are stored
    with their first coefficient positive, which lets switches on
    ``a - b`` and ``b - a`` share one case split.
    """

    __slots__ = ("pivots", "table")

    def __init__(self, pivots, table):
        pivots = [Affine.lift(p) for p in pivots]
        flip = []
        for k, p in enumerate(pivots):
            if p.is_constant():
                raise InputError("switch pivot must depend on a variable")
            if next(iter(p.coeffs.values())) < 0:
                pivots[k] = -p
                flip.append(k)
        fixed = {}
        for key, val in dict(table).items():
            key = tuple(not b if k in flip else bool(b) for k, b in enumerate(key))
            fixed[key] = Affine.lift(val)
        for key in product((True, False), repeat=len(pivots)):
            if key not in fixed:
                raise InputError(f"switch table has no entry for signs {key}")
        self.pivots = tuple(pivots)
        self.table = fixed

    @classmethod
    def simple(cls, pivot, if_nonneg, if_neg):
        """``if_nonneg`` when ``pivot >= 0`` else ``if_neg``."""
        return cls((pivot,), {(True,): if_nonneg, (False,): if_neg})

    def branch(self, signs: Mapping[Affine, bool]) -> Affine:
        return self.table[tuple(bool(signs[p]) for p in self.pivots)]

    def __call__(self, assignment):
        # on a boundary (pivot exactly 0) both sides apply; take the lower value
        options = []
        for p in self.pivots:
            v = p(assignment)
            options.append((True,) if v > 0 else (False,) if v < 0 else (True, False))
        return min(self.table[key](assignment) for key in product(*options))

    def variables(self):
        out = []
        for a in self.pivots + tuple(self.table.values()):
            out.extend(a.variables)
        return out

    def _key(self):
        return (self.pivots, tuple(sorted((k, v._key) for k, v in self.table.items())))

    def __eq__(self, other):
        return isinstance(other, Switch) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __str__(self):
        if len(self.pivots) == 1:
            p = self.pivots[0]
            return f"[{self.table[(True,)]} if {p} >= 0 else {self.table[(False,)]}]"
        parts = "; ".join(
            ",".join("+" if b else "-" for b in k) + f": {v}" for k, v in sorted(self.table.items(), reverse=True)
        )
        return "[signs of (" + ", ".join(map(str, self.pivots)) + ") -> " + parts + "]"


def exp_min(a, b) -> "Term":
    """Exponent of ``min(n^a, n^b)``."""
    a, b = Affine.lift(a), Affine.lift(b)
    d = a - b
    if d.is_constant():
        return Term(a if d.const <= 0 else b)
    return Term(Affine(), ((Fraction(1), Switch.simple(d, b, a)),))


def exp_max(a, b) -> "Term":
    """Exponent of ``max(n^a, n^b)``."""
    a, b = Affine.lift(a), Affine.lift(b)
    d = a - b
    if d.is_constant():
        return Term(a if d.const >= 0 else b)
    return Term(Affine(), ((Fraction(1), Switch.simple(d, a, b)),))


class Term:
    """An affine exponent plus a weighted sum of switches."""

    __slots__ = ("base", "switches", "label")

    def __init__(self, base=None, switches=(), label=None):
        self.base = Affine.lift(base if base is not None else 0)
        merged = {}
        for c, s in switches:
            merged[s] = merged.get(s, 0) + as_fraction(c)
        self.switches = tuple(
            sorted(((c, s) for s, c in merged.items() if c != 0), key=lambda cs: str(cs[1]))
        )
        self.label = label

    @staticmethod
    def lift(value) -> "Term":
        if isinstance(value, Term):
            return value
        return Term(Affine.lift(value))

    def pivots(self):
        return {p for _, s in self.switches for p in s.pivots}

    def resolve(self, signs: Mapping[Affine, bool]) -> Affine:
        """Affine exponent once each pivot's sign is fixed."""
        out = self.base
        for c, s in self.switches:
            out = out + c * s.branch(signs)
        return out

    def __add__(self, other):
        if isinstance(other, CostExpr):
            return NotImplemented
        other = Term.lift(other)
        return Term(self.base + other.base, self.switches + other.switches,
                    self.label or other.label)

    __radd__ = __add__

    def __mul__(self, c):
        c = as_fraction(c)
        return Term(self.base * c, tuple((k * c, s) for k, s in self.switches), self.label)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-Term.lift(other))

    def __call__(self, assignment) -> Fraction:
        return self.base(assignment) + sum((c * s(assignment) for c, s in self.switches), Fraction(0))

    def with_label(self, label):
        return Term(self.base, self.switches, label)

    def _key(self):
        return (self.base, self.switches)

    def __eq__(self, other):
        return isinstance(other, Term) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __str__(self):
        s = str(self.base)
        for c, sw in self.switches:
            s += f" + {c}*{sw}" if c != 1 else f" + {sw}"
        return s

    __repr__ = __str__


class CostExpr:
    """Leading-order cost: the maximum of its terms' exponents."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable = ()):
        seen = []
        for t in terms:
            t = Term.lift(t)
            if t not in seen:
                seen.append(t)
        if not seen:
            raise InputError("a cost needs at least one term")
        self.terms = tuple(seen)

    @staticmethod
    def lift(value) -> "CostExpr":
        if isinstance(value, CostExpr):
            return value
        return CostExpr([Term.lift(value)])

    @property
    def variables(self):
        names = []
        for t in self.terms:
            for k in t.base.variables:
                if k not in names:
                    names.append(k)
            for _, s in t.switches:
                for k in s.variables():
                    if k not in names:
                        names.append(k)
        return tuple(names)

    def pivots(self):
        out = []
        for t in self.terms:
            for p in sorted(t.pivots(), key=str):
                if p not in out:
                    out.append(p)
        return out

    def __add__(self, other):
        """Cost of doing both: exponents of every pair of terms add."""
        other = CostExpr.lift(other)
        return CostExpr(a + b for a, b in product(self.terms, other.terms))

    __radd__ = __add__

    def __mul__(self, c):
        c = as_fraction(c)
        if c < 0 and len(self.terms) > 1:
            raise InputError("negative power of a multi-term cost is not a maximum of terms")
        return CostExpr(t * c for t in self.terms)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-CostExpr.lift(other))

    def __or__(self, other):
        """Cost of the sum: union of terms."""
        return CostExpr(self.terms + CostExpr.lift(other).terms)

    def inv_sqrt(self):
        """Exponent of ``1/sqrt(quantity)``."""
        return self * Fraction(-1, 2)

    def __call__(self, assignment) -> Fraction:
        return max(t(assignment) for t in self.terms)

    def term_values(self, assignment):
        return [t(assignment) for t in self.terms]

    def same_terms(self, other):
        return set(self.terms) == set(CostExpr.lift(other).terms)

    def __eq__(self, other):
        return isinstance(other, CostExpr) and self.same_terms(other)

    def __hash__(self):
        return hash(frozenset(self.terms))

    def __str__(self):
        return "max(" + ", ".join(str(t) for t in self.terms) + ")"

    __repr__ = __str__


def cost_single_level(S, U, C, eps, delta) -> CostExpr:
    """Setup, then ``1/sqrt(eps)`` rounds of ``1/sqrt(delta)`` updates and one check."""
    S, U, C, eps, delta = map(CostExpr.lift, (S, U, C, eps, delta))
    rounds = eps.inv_sqrt()
    return S | (rounds + delta.inv_sqrt() + U) | (rounds + C)


def cost_two_level(S, U1, U2, C2, eps1, delta1, eps2, delta2) -> CostExpr:
    """Outer walk whose checking procedure is itself a walk."""
    return cost_k_level([(U1, eps1, delta1), (U2, eps2, delta2)], S, C2)


def cost_k_level(levels, S, C) -> CostExpr:
    """``k`` nested walks: level ``i`` runs once per marked-state round of every outer level."""
    levels = list(levels)
    if not levels:
        raise InputError("need at least one walk level")
    out = CostExpr.lift(S)
    prefix = CostExpr.lift(0)
    for U, eps, delta in levels:
        U, eps, delta = map(CostExpr.lift, (U, eps, delta))
        prefix = prefix + eps.inv_sqrt()
        out = out | (prefix + delta.inv_sqrt() + U)
    return out | (prefix + CostExpr.lift(C))
