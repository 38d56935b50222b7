"""scikit-learn style wrappers around the walk algorithms.

The detectors have nothing to learn: ``fit`` validates the
hyper-parameters against the training inputs and records the vertex count,
and ``predict`` runs the walk once per input.  This lets the algorithms sit
in a pipeline or be scored with the usual metrics.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import _rng
from .algorithms import (
    TriangleParams,
    graph_collision_walk,
    mss_spec,
    nested_3527_spec,
    nested_97_spec,
    run_walk,
)
from .exceptions import InputError
from .graphs import Graph
from .oracle import QueryOracle

__all__ = ["TriangleDetector", "GraphCollisionDetector"]

_ALGORITHMS = ("mss", "nested3527", "nested97")


def _as_graph(item):
    if isinstance(item, Graph):
        return item
    return Graph(np.asarray(item, dtype=bool))


class TriangleDetector(ClassifierMixin, BaseEstimator):
    """Predict whether each graph contains a triangle.

    Parameters
    ----------
    algorithm : {"mss", "nested3527", "nested97"}
    r, s, r1, r2 : walk parameters (see :class:`~nestedwalk.algorithms.TriangleParams`)
    target_error : majority-vote error target of each prediction
    random_state : seed of the measurement randomness
    """

    def __init__(self, algorithm="mss", r=3, s=Fraction(1, 3), r1=2, r2=2,
                 target_error=1e-3, random_state=0):
        self.algorithm = algorithm
        self.r = r
        self.s = s
        self.r1 = r1
        self.r2 = r2
        self.target_error = target_error
        self.random_state = random_state

    def _params(self):
        return TriangleParams(r=self.r, s=self.s, r1=self.r1, r2=self.r2)

    def fit(self, X, y=None):
        if self.algorithm not in _ALGORITHMS:
            raise InputError(f"algorithm must be one of {_ALGORITHMS}")
        graphs = [_as_graph(g) for g in X]
        if not graphs:
            raise InputError("need at least one graph")
        sizes = {g.n for g in graphs}
        params = self._params()
        for n in sizes:
            params.check(n)
        self.params_ = params
        self.n_vertices_ = sorted(sizes)
        self.classes_ = np.array([False, True])
        self.queries_ = []
        return self

    def _spec(self, n, oracle):
        if self.algorithm == "mss":
            return mss_spec(n, self.params_.r, oracle)
        if self.algorithm == "nested3527":
            return nested_3527_spec(n, self.params_, oracle)
        return nested_97_spec(n, self.params_, oracle)

    def _runs(self, X):
        check_is_fitted(self, "params_")
        rng = _rng.stream(self.random_state, "estimator")
        out = []
        for item in X:
            G = _as_graph(item)
            o = QueryOracle(G.bits)
            out.append(run_walk(self._spec(G.n, o), o, rng, self.target_error))
        self.queries_ = [r.queries for r in out]
        return out

    def predict(self, X):
        return np.array([r.verdict for r in self._runs(X)], dtype=bool)

    def predict_proba(self, X):
        """Columns: probability of answering ``False`` and ``True`` in one unboosted run."""
        p = np.array([r.probability_true for r in self._runs(X)])
        return np.column_stack([1 - p, p])


class GraphCollisionDetector(ClassifierMixin, BaseEstimator):
    """Predict graph collision on bipartite ``(graph, marking)`` pairs.

    The first ``r1`` vertices form one class (default: half of them).
    """

    def __init__(self, m=2, r1=None, target_error=1e-3, random_state=0):
        self.m = m
        self.r1 = r1
        self.target_error = target_error
        self.random_state = random_state

    def fit(self, X, y=None):
        pairs = [(_as_graph(g), tuple(int(b) for b in mk)) for g, mk in X]
        if not pairs:
            raise InputError("need at least one instance")
        for G, mk in pairs:
            r1 = G.n // 2 if self.r1 is None else self.r1
            if not 1 <= self.m <= min(r1, G.n - r1):
                raise InputError(f"m = {self.m} does not fit classes of sizes {r1} and {G.n - r1}")
            if len(mk) != G.n:
                raise InputError("marking length differs from the vertex count")
        self.classes_ = np.array([False, True])
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        rng = _rng.stream(self.random_state, "estimator")
        out = []
        for g, mk in X:
            G = _as_graph(g)
            out.append(graph_collision_walk(G, mk, self.m, r1=self.r1, rng=rng,
                                            target_error=self.target_error))
        return np.array(out, dtype=bool)
