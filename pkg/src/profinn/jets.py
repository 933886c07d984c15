"""Order-2 spatial jets composed from tape primitives.

A :class:`Jet2` carries a value together with its first and second partial
derivatives with respect to the spatial inputs (1 or 2 of them). Each
component is a tape :class:`~profinn.tape.Var`, so any scalar assembled
from jet components stays differentiable with respect to the network
parameters — that is the nesting: forward-mode in space, reverse-mode in
parameters.

Second partials are stored as the upper triangle (dim 1: `(d00,)`;
dim 2: `(d00, d01, d11)`), so mixed partials are symmetric by construction.
`d1`/`d2` may be ``None`` when a computation only needs lower order; all
operations truncate to the lowest order among their operands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tape as tp
from .errors import ConfigError, NumericalError
from .tape import Tape, Var


def tri_pairs(dim: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(dim) for j in range(i, dim)]


def tri_index(i: int, j: int, dim: int) -> int:
    if i > j:
        i, j = j, i
    # row-major upper triangle
    return sum(dim - r for r in range(i)) + (j - i)


@dataclass
class Jet2:
    """Value plus spatial derivatives up to order 2 (components are Vars)."""

    value: Var
    d1: tuple[Var, ...] | None
    d2: tuple[Var, ...] | None
    dim: int

    @property
    def order(self) -> int:
        if self.d1 is None:
            return 0
        return 1 if self.d2 is None else 2

    def d2_entry(self, i: int, j: int) -> Var:
        return self.d2[tri_index(i, j, self.dim)]


def seed_input(tape: Tape, x, index: int, dim: int, order: int = 2) -> Jet2:
    """Seed input variable `index` of `dim`: value x, d1 = e_index, d2 = 0."""
    if dim not in (1, 2):
        raise ConfigError(f"spatial dimension must be 1 or 2, got {dim}")
    if not 0 <= index < dim:
        raise ConfigError(f"seed index {index} out of range for dim {dim}")
    xv = np.asarray(x, dtype=np.float64)
    value = tape.constant(xv, tag="seed")
    if order == 0:
        return Jet2(value, None, None, dim)
    d1 = tuple(
        tape.constant(np.ones_like(xv) if k == index else np.zeros_like(xv), tag="seed_d1")
        for k in range(dim)
    )
    if order == 1:
        return Jet2(value, d1, None, dim)
    zero = tape.constant(np.zeros_like(xv), tag="seed_d2")
    d2 = tuple(zero for _ in tri_pairs(dim))
    return Jet2(value, d1, d2, dim)


def constant_jet(tape: Tape, value, d1=None, d2=None, dim: int = 1) -> Jet2:
    """Jet whose components are fixed arrays (no parameter dependence)."""
    v = tape.constant(value)
    d1v = None if d1 is None else tuple(tape.constant(c) for c in d1)
    d2v = None if d2 is None else tuple(tape.constant(c) for c in d2)
    return Jet2(v, d1v, d2v, dim)


def truncate(a: Jet2, order: int) -> Jet2:
    if order >= a.order:
        return a
    if order == 0:
        return Jet2(a.value, None, None, a.dim)
    return Jet2(a.value, a.d1, None, a.dim)


def deriv_jet(a: Jet2, axis: int) -> Jet2:
    """The partial d/dx_axis of `a`, as a jet one order lower."""
    if a.d1 is None:
        raise ValueError("deriv_jet requires order >= 1")
    if a.d2 is None:
        return Jet2(a.d1[axis], None, None, a.dim)
    d1 = tuple(a.d2_entry(axis, k) for k in range(a.dim))
    return Jet2(a.d1[axis], d1, None, a.dim)


def _pair_order(a: Jet2, b: Jet2) -> int:
    if a.dim != b.dim:
        raise ValueError(f"jet dims differ: {a.dim} vs {b.dim}")
    return min(a.order, b.order)


def jet_add(a: Jet2, b: Jet2) -> Jet2:
    order = _pair_order(a, b)
    value = a.value + b.value
    if order == 0:
        return Jet2(value, None, None, a.dim)
    d1 = tuple(a.d1[k] + b.d1[k] for k in range(a.dim))
    if order == 1:
        return Jet2(value, d1, None, a.dim)
    d2 = tuple(a.d2[t] + b.d2[t] for t in range(len(a.d2)))
    return Jet2(value, d1, d2, a.dim)


def jet_sub(a: Jet2, b: Jet2) -> Jet2:
    order = _pair_order(a, b)
    value = a.value - b.value
    if order == 0:
        return Jet2(value, None, None, a.dim)
    d1 = tuple(a.d1[k] - b.d1[k] for k in range(a.dim))
    if order == 1:
        return Jet2(value, d1, None, a.dim)
    d2 = tuple(a.d2[t] - b.d2[t] for t in range(len(a.d2)))
    return Jet2(value, d1, d2, a.dim)


def jet_mul(a: Jet2, b: Jet2) -> Jet2:
    order = _pair_order(a, b)
    value = a.value * b.value
    if order == 0:
        return Jet2(value, None, None, a.dim)
    d1 = tuple(a.d1[k] * b.value + a.value * b.d1[k] for k in range(a.dim))
    if order == 1:
        return Jet2(value, d1, None, a.dim)
    d2 = []
    for t, (i, j) in enumerate(tri_pairs(a.dim)):
        # Leibniz through order 2
        d2.append(a.d2[t] * b.value + a.d1[i] * b.d1[j] + a.d1[j] * b.d1[i]
                  + a.value * b.d2[t])
    return Jet2(value, d1, tuple(d2), a.dim)


def jet_div(a: Jet2, b: Jet2) -> Jet2:
    order = _pair_order(a, b)
    q = tp.div(a.value, b.value)
    if order == 0:
        return Jet2(q, None, None, a.dim)
    d1 = tuple(tp.div(a.d1[k] - q * b.d1[k], b.value) for k in range(a.dim))
    if order == 1:
        return Jet2(q, d1, None, a.dim)
    d2 = []
    for t, (i, j) in enumerate(tri_pairs(a.dim)):
        num = a.d2[t] - q * b.d2[t] - d1[i] * b.d1[j] - d1[j] * b.d1[i]
        d2.append(tp.div(num, b.value))
    return Jet2(q, d1, tuple(d2), a.dim)


def jet_neg(a: Jet2) -> Jet2:
    value = -a.value
    d1 = None if a.d1 is None else tuple(-c for c in a.d1)
    d2 = None if a.d2 is None else tuple(-c for c in a.d2)
    return Jet2(value, d1, d2, a.dim)


def jet_scale(a: Jet2, c) -> Jet2:
    """Multiply every component by a constant scalar or array."""
    value = a.value * c
    d1 = None if a.d1 is None else tuple(x * c for x in a.d1)
    d2 = None if a.d2 is None else tuple(x * c for x in a.d2)
    return Jet2(value, d1, d2, a.dim)


def jet_arith(a: Jet2, b: Jet2, op: str) -> Jet2:
    try:
        return {"add": jet_add, "sub": jet_sub, "mul": jet_mul, "div": jet_div}[op](a, b)
    except KeyError:
        raise ConfigError(f"unknown jet arithmetic op '{op}'") from None


def _chain(a: Jet2, value: Var, f1: Var | None, f2: Var | None) -> Jet2:
    """Apply the order-2 chain rule given f(a), f'(a), f''(a) at a.value."""
    if a.d1 is None:
        return Jet2(value, None, None, a.dim)
    d1 = tuple(f1 * a.d1[k] for k in range(a.dim))
    if a.d2 is None:
        return Jet2(value, d1, None, a.dim)
    f2d = tuple(f2 * a.d1[k] for k in range(a.dim))
    d2 = tuple(f2d[i] * a.d1[j] + f1 * a.d2[t]
               for t, (i, j) in enumerate(tri_pairs(a.dim)))
    return Jet2(value, d1, d2, a.dim)


def jet_tanh(a: Jet2) -> Jet2:
    t = tp.tanh(a.value)
    if a.d1 is None:
        return Jet2(t, None, None, a.dim)
    f1 = 1.0 - t * t
    f2 = None if a.d2 is None else -2.0 * t * f1
    return _chain(a, t, f1, f2)


def jet_exp(a: Jet2) -> Jet2:
    e = tp.exp(a.value)
    return _chain(a, e, e if a.d1 is not None else None,
                  e if a.d2 is not None else None)


def jet_sinh(a: Jet2) -> Jet2:
    s = tp.sinh(a.value)
    if a.d1 is None:
        return Jet2(s, None, None, a.dim)
    f1 = tp.cosh(a.value)
    return _chain(a, s, f1, s if a.d2 is not None else None)


def jet_cosh(a: Jet2) -> Jet2:
    c = tp.cosh(a.value)
    if a.d1 is None:
        return Jet2(c, None, None, a.dim)
    f1 = tp.sinh(a.value)
    return _chain(a, c, f1, c if a.d2 is not None else None)


def jet_sigmoid(a: Jet2) -> Jet2:
    s = tp.sigmoid(a.value)
    if a.d1 is None:
        return Jet2(s, None, None, a.dim)
    f1 = s * (1.0 - s)
    f2 = None if a.d2 is None else f1 * (1.0 - 2.0 * s)
    return _chain(a, s, f1, f2)


def jet_silu(a: Jet2) -> Jet2:
    """silu(x) = x * sigmoid(x), derivatives composed analytically."""
    s = tp.sigmoid(a.value)
    value = a.value * s
    if a.d1 is None:
        return Jet2(value, None, None, a.dim)
    sp = s * (1.0 - s)
    f1 = s + a.value * sp
    f2 = None
    if a.d2 is not None:
        f2 = sp * (2.0 + a.value * (1.0 - 2.0 * s))
    return _chain(a, value, f1, f2)


def jet_pow(a: Jet2, alpha: float) -> Jet2:
    alpha = float(alpha)
    if alpha != round(alpha) and np.any(a.value.value <= 0.0):
        bad = float(np.min(a.value.value))
        raise NumericalError(
            f"fractional power {alpha} of non-positive value (min {bad}); "
            "route through a guarded composite instead"
        )
    value = a.value ** alpha
    if a.d1 is None:
        return Jet2(value, None, None, a.dim)
    f1 = tp.cmul(a.value ** (alpha - 1.0), alpha)
    f2 = None
    if a.d2 is not None:
        f2 = tp.cmul(a.value ** (alpha - 2.0), alpha * (alpha - 1.0))
    return _chain(a, value, f1, f2)


def jet_affine(a: Jet2, scale: float, shift: float) -> Jet2:
    value = tp.cadd(tp.cmul(a.value, scale), shift)
    d1 = None if a.d1 is None else tuple(tp.cmul(c, scale) for c in a.d1)
    d2 = None if a.d2 is None else tuple(tp.cmul(c, scale) for c in a.d2)
    return Jet2(value, d1, d2, a.dim)


def jet_elementary(a: Jet2, fn: str, alpha: float | None = None,
                   shift: float = 0.0) -> Jet2:
    if fn == "pow":
        if alpha is None:
            raise ConfigError("pow requires alpha")
        return jet_pow(a, alpha)
    if fn == "affine":
        if alpha is None:
            raise ConfigError("affine requires alpha (the scale)")
        return jet_affine(a, alpha, shift)
    table = {"tanh": jet_tanh, "silu": jet_silu, "sinh": jet_sinh,
             "cosh": jet_cosh, "exp": jet_exp, "sigmoid": jet_sigmoid}
    try:
        return table[fn](a)
    except KeyError:
        raise ConfigError(f"unknown elementary function '{fn}'") from None
