"""Reverse-mode autodiff tape over numpy arrays.

Every value produced during a loss evaluation lives on a :class:`Tape` as a
:class:`Var`. Trainable parameters are registered as leaves; one reverse
sweep (:meth:`Tape.gradient`) yields the gradient of a scalar with respect
to all of them. The tape is a DAG of nodes held in topological (creation)
order, the sweep visits nodes in fixed reverse order, and adjoints are
accumulated in that order, so repeated evaluations are bitwise identical.

Nodes may have several outputs: the MLP layers fuse a whole
affine-plus-activation jet step into one node (see profinn.network), which
keeps the number of retained batch-sized arrays small. The helpers in this
module are the ordinary single-output primitives.

Spatial derivatives are not handled here; see :mod:`profinn.jets`, which
composes these primitives into order-2 jets.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError

Array = np.ndarray

_EMPTY: tuple = ()


def _as_array(x) -> Array:
    return np.asarray(x, dtype=np.float64)


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum an adjoint back down to the shape it was broadcast from."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Node:
    """One recorded operation; owns its outputs and the backward rule.

    backward(out_adjoints) -> parent adjoint contributions, aligned with
    `parents`; entries of either tuple may be None (meaning zero).
    """

    __slots__ = ("idx", "parents", "outputs", "backward", "needs_grad", "tag")

    def __init__(self, idx, parents, backward, needs_grad, tag):
        self.idx = idx
        self.parents = parents
        self.outputs: tuple[Var, ...] = ()
        self.backward = backward
        self.needs_grad = needs_grad
        self.tag = tag


class Var:
    """A float64 array plus its producing node (an output slot thereof)."""

    __slots__ = ("tape", "node", "vidx", "value")

    def __init__(self, tape, node, vidx, value):
        self.tape = tape
        self.node = node
        self.vidx = vidx
        self.value = value

    @property
    def needs_grad(self) -> bool:
        return self.node.needs_grad

    @property
    def tag(self) -> str:
        return self.node.tag

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Var({self.tag}, shape={self.value.shape})"

    # Arithmetic sugar. Non-Var operands are folded into the op as
    # constants, so they add no parents and no backward work.

    def __add__(self, other):
        return add(self, other) if isinstance(other, Var) else cadd(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other) if isinstance(other, Var) else cadd(self, -_as_array(other))

    def __rsub__(self, other):
        return cadd(neg(self), other)

    def __mul__(self, other):
        return mul(self, other) if isinstance(other, Var) else cmul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Var):
            return div(self, other)
        return cmul(self, 1.0 / _as_array(other))

    def __rtruediv__(self, other):
        return cdiv(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return pow_const(self, p)


class Tape:
    """Records nodes in topological order; owns the reverse sweep."""

    def __init__(self):
        self.nodes: list[Node] = []
        self.params: list[Var] = []
        self._nvars = 0

    def record(self, values: Sequence[Array], parents: tuple, backward,
               needs_grad: bool, tag: str) -> list[Var]:
        """Append one (possibly multi-output) node; returns its output Vars."""
        node = Node(len(self.nodes), parents, backward, needs_grad, tag)
        outs = []
        for v in values:
            outs.append(Var(self, node, self._nvars, v))
            self._nvars += 1
        node.outputs = tuple(outs)
        self.nodes.append(node)
        return outs

    def _record1(self, value: Array, parents: tuple, backward, needs_grad: bool,
                 tag: str) -> Var:
        return self.record((value,), parents, backward, needs_grad, tag)[0]

    def leaf(self, value, param: bool = False, tag: str = "leaf") -> Var:
        """Register an input array; `param=True` marks it trainable."""
        v = self._record1(_as_array(value), _EMPTY, None, param, tag)
        if param:
            self.params.append(v)
        return v

    def constant(self, value, tag: str = "const") -> Var:
        return self.leaf(value, param=False, tag=tag)

    def param_count(self) -> int:
        return sum(p.value.size for p in self.params)

    def gradient(self, loss: Var) -> np.ndarray:
        """Gradient of a scalar `loss` with respect to all param leaves, flat.

        One reverse sweep in fixed order; accumulation order is
        deterministic. Raises :class:`NumericalError` if the loss is
        non-finite, naming the first offending node on the tape.
        """
        if loss.tape is not self:
            raise ValueError("loss does not belong to this tape")
        if loss.value.shape != ():
            raise ValueError(f"gradient target must be scalar, got shape {loss.value.shape}")
        if not np.isfinite(loss.value):
            self._raise_first_nonfinite()

        adjoint: list[Array | None] = [None] * self._nvars
        adjoint[loss.vidx] = np.ones((), dtype=np.float64)
        for i in range(loss.node.idx, -1, -1):
            node = self.nodes[i]
            if not node.parents or not node.needs_grad:
                continue
            outs = tuple(adjoint[v.vidx] for v in node.outputs)
            if all(a is None for a in outs):
                continue
            contributions = node.backward(outs)
            for parent, g in zip(node.parents, contributions):
                if g is None or not parent.needs_grad:
                    continue
                prev = adjoint[parent.vidx]
                adjoint[parent.vidx] = g if prev is None else prev + g

        out = np.zeros(self.param_count(), dtype=np.float64)
        offset = 0
        for p in self.params:
            n = p.value.size
            g = adjoint[p.vidx]
            if g is not None:
                out[offset:offset + n] = np.asarray(g).reshape(-1)
            offset += n
        return out

    def _raise_first_nonfinite(self):
        for node in self.nodes:
            for v in node.outputs:
                if not np.all(np.isfinite(v.value)):
                    raise NumericalError(
                        f"non-finite value in tape node {node.idx} (op '{node.tag}', "
                        f"shape {v.value.shape})"
                    )
        raise NumericalError("loss is non-finite but no offending node found")


def param_grad(loss: Var) -> np.ndarray:
    """Gradient of a scalar tape value w.r.t. every registered parameter."""
    return loss.tape.gradient(loss)


# ---------------------------------------------------------------------------
# Single-output primitive ops
# ---------------------------------------------------------------------------

def _binary(a: Var, b: Var, value: Array, backward, tag: str) -> Var:
    return a.tape._record1(value, (a, b), backward,
                           a.needs_grad or b.needs_grad, tag)


def _unary(a: Var, value: Array, backward, tag: str) -> Var:
    return a.tape._record1(value, (a,), backward, a.needs_grad, tag)


def add(a: Var, b: Var) -> Var:
    sa, sb = a.value.shape, b.value.shape
    return _binary(a, b, a.value + b.value,
                   lambda g: (_unbroadcast(g[0], sa), _unbroadcast(g[0], sb)), "add")


def sub(a: Var, b: Var) -> Var:
    sa, sb = a.value.shape, b.value.shape
    return _binary(a, b, a.value - b.value,
                   lambda g: (_unbroadcast(g[0], sa), _unbroadcast(-g[0], sb)), "sub")


def mul(a: Var, b: Var) -> Var:
    sa, sb = a.value.shape, b.value.shape
    av, bv = a.value, b.value
    return _binary(a, b, av * bv,
                   lambda g: (_unbroadcast(g[0] * bv, sa), _unbroadcast(g[0] * av, sb)),
                   "mul")


def div(a: Var, b: Var) -> Var:
    if np.any(b.value == 0.0):
        idx = int(np.argmin(np.abs(b.value)))
        raise NumericalError(f"division by zero at flat index {idx}")
    sa, sb = a.value.shape, b.value.shape
    q = a.value / b.value
    bv = b.value
    return _binary(a, b, q,
                   lambda g: (_unbroadcast(g[0] / bv, sa),
                              _unbroadcast(-g[0] * q / bv, sb)), "div")


def neg(a: Var) -> Var:
    return _unary(a, -a.value, lambda g: (-g[0],), "neg")


def cadd(a: Var, c) -> Var:
    return _unary(a, a.value + _as_array(c),
                  lambda g: (_unbroadcast(g[0], a.value.shape),), "cadd")


def cmul(a: Var, c) -> Var:
    cv = _as_array(c)
    return _unary(a, a.value * cv,
                  lambda g: (_unbroadcast(g[0] * cv, a.value.shape),), "cmul")


def cdiv(c, b: Var) -> Var:
    """Constant divided by a Var."""
    if np.any(b.value == 0.0):
        raise NumericalError("division by zero in cdiv")
    q = _as_array(c) / b.value
    bv = b.value
    return _unary(b, q, lambda g: (_unbroadcast(-g[0] * q / bv, b.value.shape),), "cdiv")


def pow_const(a: Var, p: float) -> Var:
    p = float(p)
    av = a.value
    value = av ** p
    return _unary(a, value, lambda g: (g[0] * p * av ** (p - 1.0),), "pow")


def tanh(a: Var) -> Var:
    t = np.tanh(a.value)
    return _unary(a, t, lambda g: (g[0] * (1.0 - t * t),), "tanh")


def exp(a: Var) -> Var:
    e = np.exp(a.value)
    return _unary(a, e, lambda g: (g[0] * e,), "exp")


def sinh(a: Var) -> Var:
    c = np.cosh(a.value)
    return _unary(a, np.sinh(a.value), lambda g: (g[0] * c,), "sinh")


def cosh(a: Var) -> Var:
    s = np.sinh(a.value)
    return _unary(a, np.cosh(a.value), lambda g: (g[0] * s,), "cosh")


def sigmoid(a: Var) -> Var:
    s = 0.5 * (np.tanh(0.5 * a.value) + 1.0)
    return _unary(a, s, lambda g: (g[0] * s * (1.0 - s),), "sigmoid")


def matmul(x: Var, w: Var) -> Var:
    xv, wv = x.value, w.value
    return _binary(x, w, xv @ wv,
                   lambda g: (g[0] @ wv.T, xv.T @ g[0]), "matmul")


def reshape(a: Var, shape: tuple[int, ...]) -> Var:
    old = a.value.shape
    return _unary(a, a.value.reshape(shape), lambda g: (g[0].reshape(old),), "reshape")


def column_stack(vars_: Sequence[Var]) -> Var:
    """Stack (N,) vars into an (N, k) var."""
    tape = vars_[0].tape
    value = np.column_stack([v.value for v in vars_])
    k = len(vars_)

    def backward(g):
        return tuple(g[0][:, j] for j in range(k))

    return tape._record1(value, tuple(vars_), backward,
                         any(v.needs_grad for v in vars_), "column_stack")


def vsum(a: Var) -> Var:
    """Sum all entries to a scalar (fixed order: numpy's deterministic sum)."""
    shape = a.value.shape
    return _unary(a, np.asarray(a.value.sum()),
                  lambda g: (np.full(shape, g[0], dtype=np.float64),), "vsum")


def mean(a: Var) -> Var:
    n = a.value.size
    return cmul(vsum(a), 1.0 / n)


_ELEMENTARY: dict[str, Callable[[Var], Var]] = {
    "tanh": tanh,
    "exp": exp,
    "sinh": sinh,
    "cosh": cosh,
    "sigmoid": sigmoid,
}
