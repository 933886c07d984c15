"""Built-in profile problems plus shared coordinate-jet helpers.

Residuals are formed in z-variables: each d/dy is (1/cosh z) d/dz, and the
spatial coordinates themselves enter as constant jets of y_k = sinh(z_k).
A field evaluated with order-n jets yields residuals carrying order n-1,
so the same residual code serves interior points (values only) and
smoothness points (values plus z-gradients).
"""

from __future__ import annotations

import numpy as np

from .. import jets as J
from ..jets import Jet2
from ..tape import Tape


def coord_jet(tape: Tape, z: np.ndarray, axis: int, dim: int, order: int) -> Jet2:
    """Constant jet of y_axis = sinh(z_axis) as a function of z."""
    z = np.asarray(z, dtype=np.float64)
    value = np.sinh(z)
    d1 = None
    if order >= 1:
        d1 = tuple(np.cosh(z) if k == axis else np.zeros_like(z) for k in range(dim))
    d2 = None
    if order >= 2:
        d2 = tuple(value if (i == axis and j == axis) else np.zeros_like(z)
                   for (i, j) in J.tri_pairs(dim))
    return J.constant_jet(tape, value, d1, d2, dim)


def invcosh_jet(tape: Tape, z: np.ndarray, axis: int, dim: int, order: int) -> Jet2:
    """Constant jet of 1/cosh(z_axis), the dz/dy chain factor."""
    z = np.asarray(z, dtype=np.float64)
    c = np.cosh(z)
    value = 1.0 / c
    d1 = None
    if order >= 1:
        slope = -np.sinh(z) / (c * c)
        d1 = tuple(slope if k == axis else np.zeros_like(z) for k in range(dim))
    if order >= 2:
        raise NotImplementedError("chain factors are only needed to order 1")
    return J.constant_jet(tape, value, d1, None, dim)


def y_derivative(field: Jet2, inv_cosh: Jet2, axis: int) -> Jet2:
    """d(field)/dy_axis as a jet one order below the field's."""
    return J.jet_mul(J.deriv_jet(field, axis), inv_cosh)


# ---------------------------------------------------------------------------
# Objective evaluation, optionally chunked.
#
# The batch working set dominates runtime, so the objective can be evaluated
# piecewise: each (role, chunk) goes through its own small tape, normalized
# by the full-batch counts, and the scalar losses and gradients sum to the
# exact whole-batch result (fixed chunk order keeps it bitwise
# reproducible).
# ---------------------------------------------------------------------------

def chunk_ranges(n: int, rows: int):
    return [(lo, min(lo + rows, n)) for lo in range(0, n, rows)]


def slice_batch(batch, lo: int, hi: int):
    from ..domain import SampleBatch

    return SampleBatch(batch.points[lo:hi], batch.role, batch.epoch)


def objective(problem, theta: np.ndarray, batches: dict, weights,
              chunk_rows: int | None = None,
              boundary_per_condition: bool = False):
    """Loss, flat gradient, and decomposed parts for one parameter vector."""
    from ..loss import assemble

    if chunk_rows is None:
        tape = Tape()
        total, parts = problem.build_loss(tape, theta, batches, weights,
                                          boundary_per_condition)
        return float(total.value), tape.gradient(total), parts

    counts = problem.residual_counts(batches)
    grad = np.zeros(problem.theta_size())
    parts_acc = {"L_i": 0.0, "L_s": 0.0, "L_b": 0.0, "total": 0.0}
    for piece in problem.pieces(batches, chunk_rows):
        tape = Tape()
        ctx = problem.register(tape, theta)
        sets = piece(tape, ctx)
        scalar, parts = assemble(sets, weights, counts=counts)
        grad += tape.gradient(scalar)
        for k in parts_acc:
            parts_acc[k] += parts[k]
    return parts_acc["total"], grad, parts_acc


from .burgers import BurgersProblem, burgers_oracle, burgers_oracle_slope  # noqa: E402
from .boussinesq import BoussinesqProblem  # noqa: E402

__all__ = [
    "BoussinesqProblem",
    "BurgersProblem",
    "burgers_oracle",
    "burgers_oracle_slope",
    "coord_jet",
    "invcosh_jet",
    "y_derivative",
]
