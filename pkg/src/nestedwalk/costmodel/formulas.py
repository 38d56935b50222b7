"""Cost formulas of the triangle algorithms, symbolic and numeric.

Each ``*_expr`` builds the exponent form from the walk parameters, and
each ``*_numeric`` is the same sum of terms evaluated at concrete ``n``
and parameters (used by :func:`~nestedwalk.costmodel.fit.fit_exponent`).
"""
from __future__ import annotations

from fractions import Fraction as F

import numpy as np

from .expr import const, cost_single_level, cost_two_level, var
from .lp import ge, le

__all__ = [
    "mss_expr",
    "sparse_mss_expr",
    "nested_3527_expr",
    "nested_97_expr",
    "collision_expr",
    "mss_constraints",
    "nested_3527_constraints",
    "nested_97_constraints",
    "mss_numeric",
    "nested_3527_numeric",
    "nested_97_numeric",
]

N = const(1)  # exponent of n itself


def mss_expr():
    """Flat walk on ``r``-subsets, graph collision as the checking step."""
    rho = var("rho")
    return cost_single_level(
        S=2 * rho, U=rho, C=N / 2 + F(2, 3) * rho,
        eps=2 * rho - 2 * N, delta=-rho,
    )


def sparse_mss_expr():
    """The flat walk storing only an ``s`` fraction of the edges."""
    rho, sigma = var("rho"), var("sigma")
    return cost_single_level(
        S=sigma + 2 * rho, U=sigma + rho, C=N / 2 + F(2, 3) * rho,
        eps=sigma + 2 * rho - 2 * N, delta=-rho,
    )


def nested_3527_expr():
    """Outer walk on vertex sets, inner walk on sampled edge sets."""
    rho, sigma = var("rho"), var("sigma")
    return cost_two_level(
        S=sigma + 2 * rho,
        U1=sigma + rho, U2=const(0), C2=N / 2 + F(2, 3) * rho,
        eps1=2 * rho - 2 * N, delta1=-rho,
        eps2=sigma, delta2=-(sigma + 2 * rho),
    )


def nested_97_expr():
    """Outer walk on ``R1``, inner walk on ``R2``, collision search as the check."""
    r1, r2 = var("rho1"), var("rho2")
    return cost_two_level(
        S=r1 + r2,
        U1=r2, U2=r1, C2=N / 2 + (r1 + r2) / 3,
        eps1=r1 - N, delta1=-r1,
        eps2=r2 - N, delta2=-r2,
    )


def collision_expr():
    """Graph collision on ``r1 x r2`` with ``m``-subsets: ``m + sqrt(r1 r2 / m)``."""
    r1, r2, mu = var("rho1"), var("rho2"), var("mu")
    return cost_single_level(
        S=mu, U=const(0), C=const(0),
        eps=2 * mu - r1 - r2, delta=-mu,
    )


def mss_constraints():
    rho = var("rho")
    return [ge(rho, 0, "rho >= 0"), le(rho, 1, "rho <= 1")]


def nested_3527_constraints():
    rho, sigma = var("rho"), var("sigma")
    return [
        ge(rho, 0, "rho >= 0"), le(rho, 1, "rho <= 1"),
        le(sigma, 0, "sigma <= 0"), ge(sigma + rho, 0, "sigma + rho >= 0"),
    ]


def nested_97_constraints():
    r1, r2 = var("rho1"), var("rho2")
    return [ge(r1, 0, "rho1 >= 0"), le(r1, r2, "rho1 <= rho2"), le(r2, 1, "rho2 <= 1")]


# numeric forms: the displayed sums, parameters as real numbers

def mss_numeric(n, r):
    return r**2 + n * np.sqrt(r) + n**1.5 / r ** (1 / 3)


def nested_3527_numeric(n, r, s):
    return s * r**2 + n * s * np.sqrt(r) + n + n**1.5 / (np.sqrt(s) * r ** (1 / 3))


def nested_97_numeric(n, r1, r2):
    return r1 * r2 + np.sqrt(n) * r2 + n * np.sqrt(r1) + n**1.5 / (r1 * r2) ** (1 / 6)
