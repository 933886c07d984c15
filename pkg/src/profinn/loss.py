"""Composite residual loss: weighted interior + smoothness + boundary terms.

Default weights follow the training objective 0.1*(L_i + L_s) + L_b:
L_i is the mean over interior points of the summed squared equation
residuals, L_s the mean over smoothness points of the squared z-gradient
norms of those residuals, and L_b one pooled mean over every boundary
residual entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tape as tp
from .errors import ConfigError, NumericalError
from .tape import Var


@dataclass(frozen=True)
class LossWeights:
    interior: float = 0.1
    smoothness: float = 0.1
    boundary: float = 1.0

    def __post_init__(self):
        if min(self.interior, self.smoothness, self.boundary) < 0:
            raise ConfigError("loss weights must be nonnegative")

    def to_dict(self) -> dict:
        return {"interior": self.interior, "smoothness": self.smoothness,
                "boundary": self.boundary}


@dataclass
class LossReport:
    """Per-epoch record of the decomposed loss."""

    epoch: int
    L_i: float
    L_s: float
    L_b: float
    total: float
    lam: float

    CSV_HEADER = "epoch,L_i,L_s,L_b,total,lambda"

    def csv_row(self) -> str:
        return (f"{self.epoch},{self.L_i:.17g},{self.L_s:.17g},"
                f"{self.L_b:.17g},{self.total:.17g},{self.lam:.17g}")


@dataclass
class ResidualSet:
    """Equation residuals for one point role.

    residuals: one (N,)-shaped Var per equation. grads: per equation, the
    tuple of z-partials (present only for the smoothness role).
    """

    role: str
    residuals: list[Var]
    grads: list[tuple[Var, ...]] | None = None


def _check_finite(sets: list[ResidualSet]) -> None:
    for s in sets:
        for eq, r in enumerate(s.residuals):
            if not np.all(np.isfinite(r.value)):
                bad = int(np.flatnonzero(~np.isfinite(np.atleast_1d(r.value)))[0])
                raise NumericalError(
                    f"non-finite {s.role} residual (equation {eq}, point {bad})")


def _sum_squares(vars_: list[Var]) -> Var:
    total = None
    for v in vars_:
        sq = tp.vsum(v * v)
        total = sq if total is None else total + sq
    return total


def assemble(sets: list[ResidualSet], weights: LossWeights,
             boundary_per_condition: bool = False,
             counts: dict | None = None) -> tuple[Var, dict]:
    """Combine residual sets into the scalar training loss.

    Returns the loss as a tape Var (parameter-differentiable) plus a dict
    with the float values of L_i, L_s, L_b and total.

    `counts` overrides the normalization denominators per role (keys
    "interior", "smoothness", "boundary" mapping to global point/entry
    counts). The chunked objective uses this: each chunk contributes its
    sum of squares divided by the full-batch count, so summing the chunk
    losses (and gradients) reproduces the whole-batch loss exactly.
    """
    interior = [s for s in sets if s.role == "interior"]
    smoothness = [s for s in sets if s.role == "smoothness"]
    boundary = [s for s in sets if s.role.startswith("boundary")]
    if not interior and counts is None:
        raise ConfigError("loss needs at least one interior residual set")
    if boundary_per_condition and counts is not None:
        raise ConfigError("per-condition boundary pooling is not chunkable")
    _check_finite(sets)

    def npoints(s: ResidualSet) -> int:
        return int(np.atleast_1d(s.residuals[0].value).shape[0])

    def denom(role: str, computed: int) -> int:
        return computed if counts is None else counts[role]

    li = None
    if interior:
        n_i = denom("interior", sum(npoints(s) for s in interior))
        for s in interior:
            sq = _sum_squares(s.residuals)
            li = sq if li is None else li + sq
        li = li * (1.0 / n_i)

    ls = None
    if smoothness:
        n_s = denom("smoothness", sum(npoints(s) for s in smoothness))
        for s in smoothness:
            if s.grads is None:
                raise ConfigError("smoothness residual set lacks z-gradients")
            flat = [g for per_eq in s.grads for g in per_eq]
            sq = _sum_squares(flat)
            ls = sq if ls is None else ls + sq
        ls = ls * (1.0 / n_s)

    lb = None
    if boundary:
        if boundary_per_condition:
            means = [_sum_squares(s.residuals) * (1.0 / (npoints(s) * len(s.residuals)))
                     for s in boundary]
            lb = means[0]
            for m in means[1:]:
                lb = lb + m
            lb = lb * (1.0 / len(means))
        else:
            n_b = denom("boundary",
                        sum(npoints(s) * len(s.residuals) for s in boundary))
            for s in boundary:
                sq = _sum_squares(s.residuals)
                lb = sq if lb is None else lb + sq
            lb = lb * (1.0 / n_b)

    total = None
    parts = {"L_i": 0.0, "L_s": 0.0, "L_b": 0.0}
    if li is not None:
        total = li * weights.interior
        parts["L_i"] = float(li.value)
    if ls is not None:
        term = ls * weights.smoothness
        total = term if total is None else total + term
        parts["L_s"] = float(ls.value)
    if lb is not None:
        term = lb * weights.boundary
        total = term if total is None else total + term
        parts["L_b"] = float(lb.value)
    if total is None:
        raise ConfigError("no residual sets to assemble")
    parts["total"] = float(total.value)
    return total, parts
