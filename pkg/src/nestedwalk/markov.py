"""Reversible Markov chains, Johnson graphs and product chains.

The spectral gap reported here is the *signed* one, ``1 - lambda_2`` with
``lambda_2`` the second largest eigenvalue of the symmetrised transition
matrix.  Large negative eigenvalues do not shrink it, so the gap of a chain
can exceed one (``J(3, 1)`` has gap 3/2).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import config
from .exceptions import CapacityError, ContractError, InputError

__all__ = [
    "MarkovChain",
    "johnson_chain",
    "product_chain",
    "single_state_chain",
    "complete_chain",
    "spectral_gap",
    "symmetrized",
    "chain_eigenvalues",
    "stationary_distribution",
]

_ROW_TOL = 1e-12
_BALANCE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """Finite reversible chain.

    Attributes
    ----------
    states : tuple
        Opaque state labels; ``states[i]`` labels row ``i`` of ``P``.
    P : scipy.sparse.csr_matrix
        Row-stochastic transition matrix.
    pi : ndarray
        Stationary distribution.
    delta : float
        Signed spectral gap, see :func:`spectral_gap`.
    """

    states: tuple
    P: sp.csr_matrix
    pi: np.ndarray
    delta: float = field(default=float("nan"))
    index: dict = field(default=None, repr=False)

    @classmethod
    def from_matrix(cls, states, P, pi=None):
        """Validate ``P`` (and ``pi``) and compute the gap."""
        states = tuple(states)
        P = sp.csr_matrix(P, dtype=float)
        k = len(states)
        if P.shape != (k, k):
            raise InputError(f"P has shape {P.shape}, expected ({k}, {k})")
        if P.nnz and P.data.min() < -_ROW_TOL:
            raise InputError("transition probabilities must be non-negative")
        rows = np.asarray(P.sum(axis=1)).ravel()
        if np.abs(rows - 1.0).max(initial=0.0) > _ROW_TOL:
            raise InputError("rows of P must sum to 1")
        if pi is None:
            pi = stationary_distribution(P)
        pi = np.asarray(pi, dtype=float)
        if abs(pi.sum() - 1.0) > _ROW_TOL or (pi < 0).any():
            raise InputError("pi must be a probability vector")
        _check_detailed_balance(P, pi)
        chain = cls(states, P, pi, float("nan"), {s: i for i, s in enumerate(states)})
        object.__setattr__(chain, "delta", spectral_gap(chain))
        for arr in (chain.pi,):
            arr.setflags(write=False)
        return chain

    @property
    def size(self):
        return len(self.states)

    def dense(self):
        return self.P.toarray()

    def neighbours(self, i):
        """Indices ``j`` with ``P[i, j] > 0``."""
        lo, hi = self.P.indptr[i], self.P.indptr[i + 1]
        return self.P.indices[lo:hi]

    def row(self, i):
        """``(indices, probabilities)`` of row ``i``."""
        lo, hi = self.P.indptr[i], self.P.indptr[i + 1]
        return self.P.indices[lo:hi], self.P.data[lo:hi]


def _check_detailed_balance(P, pi):
    F = sp.diags(pi) @ P
    diff = abs(F - F.T)
    if diff.nnz and diff.max() > _BALANCE_TOL:
        raise ContractError("chain is not reversible with respect to pi")


def stationary_distribution(P):
    """Stationary vector of an irreducible chain (left Perron vector)."""
    P = sp.csr_matrix(P, dtype=float)
    k = P.shape[0]
    if k == 1:
        return np.ones(1)
    if k <= config.DENSE_EIG_THRESHOLD:
        w, v = np.linalg.eig(P.toarray().T)
        vec = np.real(v[:, np.argmin(np.abs(w - 1.0))])
    else:
        _, v = spla.eigs(P.T, k=1, sigma=1.0)
        vec = np.real(v[:, 0])
    vec = np.abs(vec)
    return vec / vec.sum()


def symmetrized(chain: MarkovChain):
    """``diag(pi)^{1/2} P diag(pi)^{-1/2}`` as a sparse symmetric matrix."""
    s = np.sqrt(chain.pi)
    A = sp.diags(s) @ chain.P @ sp.diags(1.0 / s)
    return ((A + A.T) * 0.5).tocsr()


def chain_eigenvalues(chain: MarkovChain):
    """All eigenvalues of the chain, descending (dense; small chains only)."""
    if chain.size > config.DENSE_EIG_THRESHOLD:
        raise CapacityError("full spectrum is only computed for dense-sized chains")
    return np.linalg.eigvalsh(symmetrized(chain).toarray())[::-1]


def spectral_gap(chain: MarkovChain) -> float:
    """``1 - lambda_2`` for a reversible chain.

    Single-state chains have no second eigenvalue; their gap is taken to be 1.
    Chains above the dense threshold use a Lanczos solve for the two largest
    algebraic eigenvalues.
    """
    if not np.all(np.isfinite(chain.pi)):
        raise ContractError("chain has no valid stationary distribution")
    _check_detailed_balance(chain.P, chain.pi)
    k = chain.size
    if k == 1:
        return 1.0
    A = symmetrized(chain)
    if k <= config.DENSE_EIG_THRESHOLD:
        lam = np.linalg.eigvalsh(A.toarray())
        return float(1.0 - lam[-2])
    lam = spla.eigsh(A, k=2, which="LA", return_eigenvectors=False, tol=1e-12)
    return float(1.0 - np.sort(lam)[0])


def _check_cap(count, cap):
    cap = config.STATE_CAP if cap is None else cap
    if count > cap:
        raise CapacityError(f"{count} states exceed the ceiling of {cap}")


def johnson_chain(n: int, r: int, cap=None) -> MarkovChain:
    """Uniform random walk on the Johnson graph ``J(n, r)``.

    States are sorted ``r``-tuples; each step swaps one element for one
    outside the subset, all ``r (n - r)`` moves equally likely.
    """
    if not (1 <= r < n):
        raise InputError(f"johnson_chain needs 1 <= r < n, got n={n}, r={r}")
    count = comb(n, r)
    _check_cap(count, cap)
    states = list(itertools.combinations(range(n), r))
    index = {s: i for i, s in enumerate(states)}
    deg = r * (n - r)
    rows, cols = [], []
    for i, s in enumerate(states):
        inside = set(s)
        outside = [x for x in range(n) if x not in inside]
        for a in s:
            rest = [x for x in s if x != a]
            for b in outside:
                t = tuple(sorted(rest + [b]))
                rows.append(i)
                cols.append(index[t])
    P = sp.csr_matrix((np.full(len(rows), 1.0 / deg), (rows, cols)), shape=(count, count))
    pi = np.full(count, 1.0 / count)
    return MarkovChain.from_matrix(states, P, pi)


def single_state_chain(label=()):
    return MarkovChain.from_matrix([label], sp.csr_matrix(np.ones((1, 1))), np.ones(1))


def complete_chain(k: int) -> MarkovChain:
    """Walk on ``K_k``: jump to a uniformly random *other* state."""
    if k < 2:
        raise InputError("complete_chain needs at least two states")
    P = (np.ones((k, k)) - np.eye(k)) / (k - 1)
    return MarkovChain.from_matrix(range(k), P, np.full(k, 1.0 / k))


def product_chain(P1: MarkovChain, P2: MarkovChain, cap=None) -> MarkovChain:
    """Both coordinates move in the same step: ``P = P1 ⊗ P2``."""
    count = P1.size * P2.size
    _check_cap(count, cap)
    states = [(a, b) for a in P1.states for b in P2.states]
    P = sp.kron(P1.P, P2.P, format="csr")
    pi = np.kron(P1.pi, P2.pi)
    return MarkovChain.from_matrix(states, P, pi)
