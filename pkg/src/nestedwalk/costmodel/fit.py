"""Numerical cross-check of the exponent LP.

For each ``n`` the numeric cost is minimised over its parameters by
coordinate descent on ``log_n`` of each parameter, starting from the LP
optimum.  The slope of ``log(min cost)`` against ``log(n)`` estimates the
optimal exponent.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ..exceptions import InputError

__all__ = ["minimize_cost", "fit_exponent", "DEFAULT_GRID"]

#: ``n`` from ``10^3`` to ``10^9`` in half-decade steps of 1.5.
DEFAULT_GRID = tuple(10.0**e for e in (3.0, 4.5, 6.0, 7.5, 9.0))


def minimize_cost(cost_fn: Callable, n, start=(), bounds=None, sweeps=200, tol=1e-12):
    """Smallest ``cost_fn(n, *params)`` with ``params = n ** exponents``.

    ``start`` are the initial exponents and ``bounds`` a ``(lo, hi)`` pair
    per exponent (default ``(0, 1)``).  Returns ``(cost, exponents)``.
    """
    x = np.array(start, dtype=float)
    if bounds is None:
        bounds = [(0.0, 1.0)] * x.size
    ln = math.log(n)

    def logcost(xs):
        val = cost_fn(n, *(n**v for v in xs))
        if not np.isfinite(val) or val <= 0:
            raise InputError(f"cost is not finite and positive at n={n}, exponents={list(xs)}")
        return math.log(val)

    best = logcost(x)
    for _ in range(sweeps):
        before = best
        for k in range(x.size):
            lo, hi = bounds[k]

            def along(v, k=k):
                y = x.copy()
                y[k] = v
                return logcost(y)

            res = minimize_scalar(along, bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-10 / max(ln, 1.0)})
            if res.fun < best:
                best = float(res.fun)
                x[k] = res.x
        if before - best <= tol:
            break
    return math.exp(best), x


def fit_exponent(cost_fn: Callable, n_values: Sequence = DEFAULT_GRID, start=(), bounds=None) -> float:
    """Least-squares slope of ``log(min cost)`` against ``log(n)``."""
    n_values = [float(n) for n in n_values]
    if len(n_values) < 2:
        raise InputError("need at least two values of n")
    if max(n_values) / min(n_values) < 1e3:
        raise InputError("n values should span at least three decades")
    logs_n, logs_c = [], []
    for n in n_values:
        cost, _ = minimize_cost(cost_fn, n, start, bounds)
        logs_n.append(math.log(n))
        logs_c.append(math.log(cost))
    slope, _ = np.polyfit(logs_n, logs_c, 1)
    return float(slope)
