"""Black-box query access to a hidden bit string, with exact call counting.

Simulated circuits are compiled ahead of time by reading bits through
:meth:`QueryOracle.peek`, which does not count.  The compiled operator
declares how many oracle calls its circuit makes and that many are charged
each time it is applied.  Direct classical reads go through
:meth:`QueryOracle.query` and cost one call each.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import binom

from . import config
from .exceptions import InputError
from .hilbert import LinearOp, RegisterLayout

__all__ = [
    "QueryOracle",
    "OracleView",
    "BoundedCheck",
    "boost",
    "boost_rounds",
    "majority_error",
    "majority",
]


class QueryOracle:
    """Hidden input ``x`` and a non-decreasing query counter."""

    def __init__(self, x):
        bits = np.array([int(b) for b in x], dtype=np.int8)
        if bits.size and not np.isin(bits, (0, 1)).all():
            raise InputError("oracle input must be a bit string")
        bits.setflags(write=False)
        self._x = bits
        self.count = 0

    @classmethod
    def from_graph(cls, G):
        return cls(G.bits)

    def __len__(self):
        return int(self._x.size)

    def _check(self, j):
        if not 0 <= j < self._x.size:
            raise InputError(f"query index {j} out of range for input of length {self._x.size}")

    def query(self, j):
        """Classical query of bit ``j``; costs one call."""
        self._check(j)
        self.count += 1
        return int(self._x[j])

    def peek(self, j):
        """Read bit ``j`` while compiling a circuit (charged when the circuit runs)."""
        self._check(j)
        return int(self._x[j])

    def charge(self, k):
        if k < 0:
            raise InputError("cannot charge a negative number of queries")
        self.count += int(k)

    def fork(self):
        """Fresh counter over the same input."""
        return QueryOracle(self._x)

    def bit_query(self, layout: RegisterLayout = None, index="j", target="b") -> LinearOp:
        """``O_x : |j, b> -> |j, b xor x_j>`` on ``layout`` (one call per application)."""
        n = self._x.size
        if layout is None:
            layout = RegisterLayout([(index, n), (target, 2)])
        if layout.dim(index) != n or layout.dim(target) != 2:
            raise InputError(f"bit_query needs an index register of size {n} and a qubit target")
        shape = layout.register_shape()
        grid = np.indices(shape).reshape(len(shape), -1)
        ki, kt = layout.names.index(index), layout.names.index(target)
        xs = self._x[grid[ki]]
        grid[kt] = grid[kt] ^ xs
        perm = np.ravel_multi_index(grid, shape)

        def mv(v):
            out = np.empty_like(v)
            out[perm] = v
            return out

        return LinearOp(layout, mv, mv, queries=1, oracle=self, name="O_x")


class OracleView:
    """Oracle over ``y_j = x[indices[j]]`` that bills the parent oracle.

    ``None`` entries are constant-zero bits that cost nothing to read.
    """

    def __init__(self, parent, indices):
        self.parent = parent
        self.indices = tuple(indices)

    def __len__(self):
        return len(self.indices)

    def query(self, j):
        i = self.indices[j]
        if i is None:
            return 0
        return self.parent.query(i)

    def peek(self, j):
        i = self.indices[j]
        return 0 if i is None else self.parent.peek(i)

    def charge(self, k):
        self.parent.charge(k)

    @property
    def count(self):
        return self.parent.count


def boost_rounds(target_error):
    """Repetitions ``k = ceil(18 ln(1/target))`` of a majority vote."""
    if not 0.0 < target_error < 1.0:
        raise InputError(f"target error must lie in (0, 1), got {target_error}")
    return max(1, math.ceil(config.BOOST_CONSTANT * math.log(1.0 / target_error)))


def majority_error(error, rounds):
    """Probability that a strict majority of ``rounds`` runs is wrong.

    Ties count as wrong, so the value is an upper bound for either tie rule.
    """
    if error <= 0.0:
        return 0.0
    # wrong outcomes >= ceil(rounds / 2)
    return float(binom.sf(math.ceil(rounds / 2) - 1, rounds, error))


def majority(samples):
    """Majority of boolean samples (ties resolve to ``False``)."""
    samples = np.asarray(samples, dtype=bool)
    return bool(2 * samples.sum() > samples.size)


@dataclass(frozen=True)
class BoundedCheck:
    """A bounded-error phase-flip procedure for a boolean predicate.

    On an input where the predicate is ``truth`` the procedure flips the
    phase with probability ``1 - error`` (if true) or ``error`` (if false);
    the retained branch amplitude is therefore ``±(1 - 2 error)``.
    """

    truth: bool
    error: float = 0.0
    queries: int = 0

    @property
    def value(self):
        """Amplitude of the phase-flip action on a satisfying/unsatisfying input."""
        sign = -1.0 if self.truth else 1.0
        return sign * (1.0 - 2.0 * self.error)

    def sample(self, rng):
        """One run's answer."""
        wrong = rng.random() < self.error
        return bool(self.truth) != bool(wrong)


def boost(check: BoundedCheck, target_error) -> BoundedCheck:
    """Majority-vote amplification of a bounded-error check.

    The answer is computed into a register ``k`` times, the phase is flipped
    on the majority, and the answers are uncomputed, so the query cost is
    ``k * 2 * check.queries``.
    """
    k = boost_rounds(target_error)
    if check.error > 0.5:
        raise InputError("cannot boost a procedure that errs with probability above 1/2")
    err = majority_error(check.error, k)
    return replace(check, error=err, queries=k * 2 * check.queries)
