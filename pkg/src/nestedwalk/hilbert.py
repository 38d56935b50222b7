"""Exact multi-register state vectors and linear operators.

A :class:`RegisterLayout` names the tensor factors of a Hilbert space; a
register may itself be a layout, which is how nested data structures
(``H_D = H_Ω' ⊗ H_D'``) are expressed.  Operators are matrix-free: a
:class:`LinearOp` wraps a function acting on arrays of shape ``(dim,)`` or
``(dim, batch)``, so ancilla registers of phase estimation can ride along as a
batch axis without ever being materialised as operators.
"""
from __future__ import annotations

from typing import Callable, Mapping, Optional

import numpy as np
import scipy.sparse as sp

from . import config
from .exceptions import CapacityError, InputError

__all__ = [
    "RegisterLayout",
    "StateVector",
    "LinearOp",
    "apply",
    "inner_product",
    "reflection_about",
    "controlled",
    "identity",
    "embed",
    "fidelity",
]

_NORM_TOL = 1e-9


class RegisterLayout:
    """Ordered, named tensor factors.

    Parameters
    ----------
    registers : sequence of (name, dim) pairs
        ``dim`` is a positive int or another :class:`RegisterLayout`.
    """

    __slots__ = ("registers", "_leaf_dims", "_offsets", "total")

    def __init__(self, registers, cap=None):
        regs = []
        seen = set()
        for name, dim in registers:
            if name in seen:
                raise InputError(f"duplicate register name {name!r}")
            seen.add(name)
            if isinstance(dim, RegisterLayout):
                regs.append((name, dim))
            else:
                d = int(dim)
                if d < 1:
                    raise InputError(f"register {name!r} must have dimension >= 1")
                regs.append((name, d))
        self.registers = tuple(regs)
        leaf, offsets = [], {}
        for name, dim in self.registers:
            start = len(leaf)
            leaf.extend(dim.dims if isinstance(dim, RegisterLayout) else [dim])
            offsets[name] = (start, len(leaf))
        self._leaf_dims = tuple(leaf)
        self._offsets = offsets
        self.total = int(np.prod(leaf, dtype=object)) if leaf else 1
        cap = config.dim_cap() if cap is None else cap
        if self.total > cap:
            raise CapacityError(f"Hilbert space of dimension {self.total} exceeds cap {cap}")

    @property
    def names(self):
        return tuple(name for name, _ in self.registers)

    @property
    def dims(self):
        """Leaf dimensions in tensor order (nested layouts flattened)."""
        return self._leaf_dims

    def dim(self, name):
        start, stop = self._offsets[name]
        return int(np.prod(self._leaf_dims[start:stop], dtype=object))

    def sub(self, name):
        for n, d in self.registers:
            if n == name:
                return d if isinstance(d, RegisterLayout) else RegisterLayout([(n, d)])
        raise KeyError(name)

    def axes(self, name):
        start, stop = self._offsets[name]
        return tuple(range(start, stop))

    def index(self, **values):
        """Flat basis index; unspecified registers default to 0."""
        idx = 0
        for name, _ in self.registers:
            idx = idx * self.dim(name) + int(values.get(name, 0))
        return idx

    def decompose(self, idx):
        """Per-register indices of flat basis index ``idx``."""
        out = {}
        for name, _ in reversed(self.registers):
            d = self.dim(name)
            out[name] = idx % d
            idx //= d
        return dict(reversed(list(out.items())))

    def register_shape(self):
        return tuple(self.dim(n) for n in self.names)

    def __eq__(self, other):
        return isinstance(other, RegisterLayout) and self.registers == other.registers

    def __hash__(self):
        return hash(self.registers)

    def __repr__(self):
        inner = ", ".join(f"{n}:{d!r}" if isinstance(d, RegisterLayout) else f"{n}:{d}" for n, d in self.registers)
        return f"RegisterLayout({inner})"


class StateVector:
    """Immutable amplitude vector over a :class:`RegisterLayout`."""

    __slots__ = ("layout", "_amp")

    def __init__(self, layout: RegisterLayout, amplitudes, normalized=True):
        a = np.array(amplitudes, dtype=complex).ravel()
        if a.shape[0] != layout.total:
            raise InputError(f"amplitude vector has length {a.shape[0]}, layout needs {layout.total}")
        if normalized and abs(np.linalg.norm(a) - 1.0) > _NORM_TOL:
            raise InputError(f"state is not normalised (norm {np.linalg.norm(a):.3e})")
        a.setflags(write=False)
        self.layout = layout
        self._amp = a

    @classmethod
    def basis(cls, layout, **values):
        a = np.zeros(layout.total, dtype=complex)
        a[layout.index(**values)] = 1.0
        return cls(layout, a)

    @property
    def amplitudes(self):
        return self._amp

    def norm(self):
        return float(np.linalg.norm(self._amp))

    def tensor(self):
        """Amplitudes reshaped to one axis per top-level register."""
        return self._amp.reshape(self.layout.register_shape())

    def probabilities(self, name):
        """Marginal distribution of register ``name``."""
        t = np.abs(self.tensor()) ** 2
        k = self.layout.names.index(name)
        other = tuple(i for i in range(t.ndim) if i != k)
        return t.sum(axis=other)

    def __repr__(self):
        return f"StateVector({self.layout!r}, norm={self.norm():.6f})"


class LinearOp:
    """Matrix-free operator on a layout.

    ``matvec`` maps arrays of shape ``(dim,)`` or ``(dim, b)`` to the same
    shape.  ``queries`` is the number of oracle calls one application costs;
    :func:`apply` charges them to ``oracle``.
    """

    __slots__ = ("layout", "_mv", "_rmv", "queries", "oracle", "name")

    def __init__(self, layout: RegisterLayout, matvec: Callable, rmatvec: Optional[Callable] = None,
                 queries: int = 0, oracle=None, name: str = "op"):
        self.layout = layout
        self._mv = matvec
        self._rmv = rmatvec
        self.queries = int(queries)
        self.oracle = oracle
        self.name = name

    @classmethod
    def from_matrix(cls, layout, M, queries=0, oracle=None, name="matrix"):
        if sp.issparse(M):
            M = sp.csr_matrix(M, dtype=complex)
            MH = M.conj().T.tocsr()
        else:
            M = np.asarray(M, dtype=complex)
            MH = M.conj().T
        if M.shape != (layout.total, layout.total):
            raise InputError(f"matrix shape {M.shape} does not match layout dimension {layout.total}")
        return cls(layout, lambda x: M @ x, lambda x: MH @ x, queries, oracle, name)

    def __call__(self, x):
        return self._mv(x)

    @property
    def H(self):
        """Adjoint; costs the same number of queries."""
        if self._rmv is None:
            raise NotImplementedError(f"operator {self.name!r} has no adjoint")
        return LinearOp(self.layout, self._rmv, self._mv, self.queries, self.oracle, self.name + "†")

    def __matmul__(self, other):
        """``A @ B`` applies ``B`` first."""
        if not isinstance(other, LinearOp):
            return NotImplemented
        if other.layout != self.layout:
            raise InputError("cannot compose operators on different layouts")
        a, b = self, other
        rmv = None
        if a._rmv is not None and b._rmv is not None:
            rmv = lambda x: b._rmv(a._rmv(x))  # noqa: E731
        return LinearOp(self.layout, lambda x: a._mv(b._mv(x)), rmv,
                        a.queries + b.queries, a.oracle if a.oracle is not None else b.oracle, f"{a.name}·{b.name}")

    def with_oracle(self, oracle, queries=None):
        return LinearOp(self.layout, self._mv, self._rmv,
                        self.queries if queries is None else queries, oracle, self.name)

    def to_matrix(self):
        """Dense matrix (applies the operator to the identity)."""
        return np.asarray(self._mv(np.eye(self.layout.total, dtype=complex)))

    def __repr__(self):
        return f"LinearOp({self.name!r}, dim={self.layout.total}, queries={self.queries})"


def apply(op: LinearOp, s: StateVector, normalized=True) -> StateVector:
    """``op · s``; charges ``op.queries`` to the attached oracle."""
    if op.layout != s.layout:
        raise InputError("operator and state live on different layouts")
    out = op(s.amplitudes.astype(complex, copy=True))
    if op.oracle is not None and op.queries:
        op.oracle.charge(op.queries)
    return StateVector(s.layout, out, normalized=normalized)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>`` (antilinear in ``a``)."""
    if a.layout != b.layout:
        raise InputError("states live on different layouts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2``."""
    return abs(inner_product(a, b)) ** 2


def identity(layout):
    return LinearOp(layout, lambda x: x.copy(), lambda x: x.copy(), name="I")


def reflection_about(psi: StateVector) -> LinearOp:
    """``2|psi><psi| - I``."""
    if abs(psi.norm() - 1.0) > _NORM_TOL:
        raise InputError("reflection axis must be normalised")
    v = psi.amplitudes.copy()

    def mv(x):
        if x.ndim == 1:
            return 2.0 * v * np.vdot(v, x) - x
        return 2.0 * np.outer(v, v.conj() @ x) - x

    return LinearOp(psi.layout, mv, mv, name="reflect")


def _move(x, layout, targets):
    """Reshape ``x`` so the target registers form the first axis."""
    dims = list(layout.dims)
    batch = x.shape[1:]
    t = x.reshape(dims + list(batch))
    axes = [a for name in targets for a in layout.axes(name)]
    rest = [a for a in range(len(dims)) if a not in axes]
    order = axes + rest + list(range(len(dims), len(dims) + len(batch)))
    moved = np.transpose(t, order)
    tdim = int(np.prod([dims[a] for a in axes], dtype=object))
    flat = moved.reshape(tdim, -1)
    shape_after = moved.shape
    inverse = np.argsort(order)

    def restore(y):
        return np.transpose(y.reshape(shape_after), inverse).reshape((layout.total,) + batch)

    return flat, restore


def embed(layout: RegisterLayout, targets, M, queries=0, oracle=None, name="embedded"):
    """Operator acting as matrix ``M`` on registers ``targets``, identity elsewhere.

    ``M`` may be a dense array, a sparse matrix or a :class:`LinearOp` whose
    layout covers exactly the target registers.
    """
    targets = list(targets)
    tdim = int(np.prod([layout.dim(n) for n in targets], dtype=object))
    if isinstance(M, LinearOp):
        if M.layout.total != tdim:
            raise InputError("embedded operator has the wrong dimension")
        f, g = M._mv, M._rmv
    else:
        if M.shape != (tdim, tdim):
            raise InputError(f"matrix of shape {M.shape} cannot act on {targets} (dim {tdim})")
        if sp.issparse(M):
            M = sp.csr_matrix(M, dtype=complex)
        MH = M.conj().T
        if sp.issparse(MH):
            MH = MH.tocsr()
        f = lambda y: M @ y  # noqa: E731
        g = lambda y: MH @ y  # noqa: E731

    def lift(fn):
        def mv(x):
            flat, restore = _move(x, layout, targets)
            return restore(fn(flat))
        return mv

    return LinearOp(layout, lift(f), lift(g) if g is not None else None, queries, oracle, name)


def controlled(op_by_index: Mapping, control: str, layout: RegisterLayout, name="controlled") -> LinearOp:
    """Block-diagonal ``Σ_i |i><i| ⊗ U_i`` on ``layout``.

    ``op_by_index[i]`` acts on the remaining registers (in layout order) and
    may be a matrix, a :class:`LinearOp`, or ``None`` for the identity.
    Indices missing from the mapping also get the identity.  The query cost
    is the maximum over blocks.
    """
    cdim = layout.dim(control)
    rest_names = [n for n in layout.names if n != control]
    rdim = layout.total // cdim
    blocks = {}
    cost = 0
    for i, U in op_by_index.items():
        if not 0 <= i < cdim:
            raise InputError(f"control index {i} out of range")
        if U is None:
            continue
        if isinstance(U, LinearOp):
            if U.layout.total != rdim:
                raise InputError(f"block {i} has dimension {U.layout.total}, expected {rdim}")
            cost = max(cost, U.queries)
            blocks[i] = (U._mv, U._rmv)
        else:
            if U.shape != (rdim, rdim):
                raise InputError(f"block {i} has shape {U.shape}, expected ({rdim}, {rdim})")
            Ui = sp.csr_matrix(U, dtype=complex) if sp.issparse(U) else np.asarray(U, dtype=complex)
            UH = Ui.conj().T
            blocks[i] = ((lambda M: lambda y: M @ y)(Ui), (lambda M: lambda y: M @ y)(UH))

    def make(which):
        def mv(x):
            flat, restore = _move(x, layout, [control])
            out = flat.copy()
            # flat rows index the control; columns the rest (and batch)
            nb = flat.shape[1] // rdim
            for i, fns in blocks.items():
                row = flat[i].reshape(rdim, nb)
                out[i] = fns[which](row).reshape(-1)
            return restore(out)
        return mv

    _ = rest_names
    return LinearOp(layout, make(0), make(1), cost, None, name)
