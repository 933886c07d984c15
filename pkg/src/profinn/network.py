"""MLP evaluation under jets, parameter flattening, hard-constraint wrappers.

A network function here is a callable ``f(tape, leaves, z_jets) -> Jet2``
where ``leaves`` are the tape leaves for this network's tensors (created by
:func:`register_params`) and ``z_jets`` is one jet per input axis. Wrappers
(parity, Taylor nondegeneracy, exact asymptotics) compose such callables,
so the raw network stays unconstrained and the constraints hold structurally.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import jets as J
from . import tape as tp
from .errors import ConfigError
from .jets import Jet2
from .tape import Tape, Var

CHECKPOINT_MAGIC = b"PROFINN\x00"
CHECKPOINT_VERSION = 1

_ACTIVATIONS = {"tanh": J.jet_tanh, "silu": J.jet_silu}


@dataclass(frozen=True)
class MlpConfig:
    """Architecture of one scalar-output MLP.

    `hidden_layers` counts activated layers; the affine output head is extra.
    Burgers default: 4 hidden layers, width 20, tanh. Boussinesq default:
    7 hidden layers, width 30, silu.
    """

    input_dim: int
    hidden_layers: int
    width: int
    activation: str
    seed: int = 0

    def __post_init__(self):
        if self.input_dim not in (1, 2):
            raise ConfigError(f"input_dim must be 1 or 2, got {self.input_dim}")
        if self.hidden_layers < 1 or self.width < 1:
            raise ConfigError("hidden_layers and width must be positive")
        if self.activation not in _ACTIVATIONS:
            raise ConfigError(f"activation must be one of {sorted(_ACTIVATIONS)}")

    def layer_shapes(self) -> list[tuple[int, int]]:
        dims = [self.input_dim] + [self.width] * self.hidden_layers + [1]
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]

    def param_count(self) -> int:
        return sum((fi + 1) * fo for fi, fo in self.layer_shapes())

    def to_dict(self) -> dict:
        return {"input_dim": self.input_dim, "hidden_layers": self.hidden_layers,
                "width": self.width, "activation": self.activation, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "MlpConfig":
        return cls(**d)


@dataclass(frozen=True)
class ConstraintSpec:
    """Hard constraints applied around a raw network.

    parity: per-input-axis "odd" / "even" / "none".
    taylor: "none" / "burgers" / "boussinesq_omega".
    asymptotics: "weak" or "exact"; exact mode needs decay_exponent
    (lambda) and cutoff_power.
    """

    parity: tuple[str, ...] = ("none",)
    taylor: str = "none"
    asymptotics: str = "weak"
    decay_exponent: float | None = None
    cutoff_power: int = 15

    def __post_init__(self):
        for p in self.parity:
            if p not in ("odd", "even", "none"):
                raise ConfigError(f"bad parity '{p}'")
        if self.taylor not in ("none", "burgers", "boussinesq_omega"):
            raise ConfigError(f"bad taylor constraint '{self.taylor}'")
        if self.asymptotics not in ("weak", "exact"):
            raise ConfigError(f"bad asymptotics mode '{self.asymptotics}'")
        if self.taylor == "burgers" and self.parity[0] != "odd":
            raise ConfigError("taylor=burgers requires odd parity on the axis")
        if self.asymptotics == "exact":
            if self.decay_exponent is None or self.decay_exponent <= 0:
                raise ConfigError("exact asymptotics requires decay_exponent > 0")

    def to_dict(self) -> dict:
        return {"parity": list(self.parity), "taylor": self.taylor,
                "asymptotics": self.asymptotics,
                "decay_exponent": self.decay_exponent,
                "cutoff_power": self.cutoff_power}

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintSpec":
        d = dict(d)
        d["parity"] = tuple(d["parity"])
        return cls(**d)


# ---------------------------------------------------------------------------
# Parameter vectors
# ---------------------------------------------------------------------------

def init_params(config: MlpConfig) -> np.ndarray:
    """Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    chunks = []
    for fan_in, fan_out in config.layer_shapes():
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    return np.concatenate(chunks)


def unflatten(theta: np.ndarray, config: MlpConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    """Flat vector -> [(W, b), ...] views, layout (W0, b0, W1, b1, ...)."""
    if theta.size != config.param_count():
        raise ConfigError(
            f"parameter vector has length {theta.size}, expected {config.param_count()}"
        )
    out = []
    offset = 0
    for fan_in, fan_out in config.layer_shapes():
        w = theta[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out)
        offset += fan_in * fan_out
        b = theta[offset:offset + fan_out]
        offset += fan_out
        out.append((w, b))
    return out


def flatten(layers: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    chunks = []
    for w, b in layers:
        chunks.append(np.asarray(w, dtype=np.float64).reshape(-1))
        chunks.append(np.asarray(b, dtype=np.float64).reshape(-1))
    return np.concatenate(chunks)


def register_params(tape: Tape, theta: np.ndarray, config: MlpConfig) -> list[tuple[Var, Var]]:
    """Register each layer tensor as a param leaf, in flat-layout order."""
    return [(tape.leaf(w, param=True, tag="W"), tape.leaf(b, param=True, tag="b"))
            for w, b in unflatten(theta, config)]


# ---------------------------------------------------------------------------
# Forward evaluation
#
# Each hidden layer is ONE fused tape node computing every jet channel
# (value, d1 per axis, d2 per triangle entry) through the affine map and the
# activation chain rule, with an analytic backward. Fusing keeps the number
# of retained batch-sized arrays per layer small, which dominates runtime.
# ---------------------------------------------------------------------------

def _stack_inputs(jet_list: list[Jet2]) -> Jet2:
    """Per-axis scalar jets -> one jet with (N, dim)-shaped components."""
    dim = len(jet_list)
    value = tp.column_stack([j.value for j in jet_list])
    order = min(j.order for j in jet_list)
    d1 = None
    d2 = None
    if order >= 1:
        d1 = tuple(tp.column_stack([j.d1[k] for j in jet_list]) for k in range(dim))
    if order >= 2:
        d2 = tuple(tp.column_stack([j.d2[t] for j in jet_list])
                   for t in range(len(J.tri_pairs(dim))))
    return Jet2(value, d1, d2, dim)


def _jet_channels(x: Jet2) -> list[Var]:
    chans = [x.value]
    if x.d1 is not None:
        chans.extend(x.d1)
    if x.d2 is not None:
        chans.extend(x.d2)
    return chans


def _channels_to_jet(chans, dim: int, order: int) -> Jet2:
    d1 = tuple(chans[1:1 + dim]) if order >= 1 else None
    d2 = tuple(chans[1 + dim:]) if order >= 2 else None
    return Jet2(chans[0], d1, d2, dim)


def _fused_layer(tape: Tape, x: Jet2, w: Var, b: Var, activation: str | None,
                 squeeze: bool = False) -> Jet2:
    """One affine(+activation) layer over all jet channels as a single node."""
    dim, order = x.dim, x.order
    tri = J.tri_pairs(dim) if order >= 2 else []
    chans = _jet_channels(x)
    xv = [c.value for c in chans]
    wv, bv = w.value, b.value
    n_d1 = dim if order >= 1 else 0

    if squeeze:
        pre = [(v @ wv).reshape(-1) for v in xv]
        pre[0] = pre[0] + bv
    else:
        pre = [v @ wv for v in xv]
        pre[0] = pre[0] + bv
    v = pre[0]
    d1 = pre[1:1 + n_d1]
    d2 = pre[1 + n_d1:]

    if activation is None:
        def backward(gs):
            contribs: list = [None] * len(chans) + [None, None]
            w_bar = None
            for ci, g in enumerate(gs):
                if g is None:
                    continue
                g2d = g[:, None] if squeeze else g
                if chans[ci].needs_grad:
                    contribs[ci] = g2d @ wv.T
                term = xv[ci].T @ g2d
                w_bar = term if w_bar is None else w_bar + term
            contribs[-2] = w_bar
            if gs[0] is not None:
                contribs[-1] = np.atleast_1d(gs[0].sum(axis=0))
            return contribs

        outs = tape.record(pre, tuple(chans) + (w, b), backward,
                           any(c.needs_grad for c in chans) or w.needs_grad
                           or b.needs_grad, "affine_jet")
        return _channels_to_jet(outs, dim, order)

    # activation state; f2 is part of the order-2 forward, f3 backward-only
    if activation == "tanh":
        t = np.tanh(v)
        f1 = 1.0 - t * t

        def calc_f2():
            return -2.0 * t * f1

        def calc_f3():
            return -2.0 * f1 * (f1 - 2.0 * t * t)
    else:  # silu
        s = 0.5 * (np.tanh(0.5 * v) + 1.0)
        t = v * s
        sp = s * (1.0 - s)
        f1 = s + v * sp

        def calc_f2():
            return sp * (2.0 + v * (1.0 - 2.0 * s))

        def calc_f3():
            u = 1.0 - 2.0 * s
            return sp * (3.0 * u + v * (u * u - 2.0 * sp))

    f2_fwd = calc_f2() if order >= 2 else None
    out_vals = [t]
    out_vals += [f1 * dk for dk in d1]
    if order >= 2:
        out_vals += [f2_fwd * d1[i] * d1[j] + f1 * d2[ti]
                     for ti, (i, j) in enumerate(tri)]

    def backward(gs):
        gt = gs[0]
        g1 = gs[1:1 + n_d1]
        g2 = gs[1 + n_d1:]
        f2 = f3 = None
        if any(g is not None for g in g1) or any(g is not None for g in g2):
            f2 = f2_fwd if f2_fwd is not None else calc_f2()
        if any(g is not None for g in g2):
            f3 = calc_f3()

        gv = gt * f1 if gt is not None else None
        gd1: list = [None] * n_d1
        gd2: list = [None] * len(g2)
        for k, g in enumerate(g1):
            if g is None:
                continue
            term = g * (f2 * d1[k])
            gv = term if gv is None else gv + term
            gd1[k] = g * f1
        for ti, g in enumerate(g2):
            if g is None:
                continue
            i, j = tri[ti]
            term = g * (f3 * (d1[i] * d1[j]) + f2 * d2[ti])
            gv = term if gv is None else gv + term
            gf2 = g * f2
            c_i = gf2 * d1[j]
            gd1[i] = c_i if gd1[i] is None else gd1[i] + c_i
            c_j = gf2 * d1[i]
            gd1[j] = c_j if gd1[j] is None else gd1[j] + c_j
            gd2[ti] = g * f1

        pre_adj = [gv] + gd1 + gd2
        contribs: list = [None] * len(chans) + [None, None]
        w_bar = None
        for ci, g in enumerate(pre_adj):
            if g is None:
                continue
            if chans[ci].needs_grad:
                contribs[ci] = g @ wv.T
            term = xv[ci].T @ g
            w_bar = term if w_bar is None else w_bar + term
        contribs[-2] = w_bar
        if gv is not None:
            contribs[-1] = gv.sum(axis=0)
        return contribs

    outs = tape.record(out_vals, tuple(chans) + (w, b), backward,
                       any(c.needs_grad for c in chans) or w.needs_grad
                       or b.needs_grad, f"layer_{activation}")
    return _channels_to_jet(outs, dim, order)


def forward_jet(tape: Tape, leaves: list[tuple[Var, Var]], config: MlpConfig,
                inputs: list[Jet2]) -> Jet2:
    """Evaluate the MLP on per-axis input jets; returns a scalar-output jet."""
    if len(inputs) != config.input_dim:
        raise ConfigError(f"expected {config.input_dim} input jets, got {len(inputs)}")
    x = _stack_inputs(inputs)
    for w, b in leaves[:-1]:
        x = _fused_layer(tape, x, w, b, config.activation)
    w, b = leaves[-1]
    return _fused_layer(tape, x, w, b, None, squeeze=True)


def forward_jet_composed(tape: Tape, leaves: list[tuple[Var, Var]],
                         config: MlpConfig, inputs: list[Jet2]) -> Jet2:
    """Reference forward built purely from primitive jet ops.

    Slower than :func:`forward_jet`; kept as the second route for
    verifying the fused layers.
    """
    if len(inputs) != config.input_dim:
        raise ConfigError(f"expected {config.input_dim} input jets, got {len(inputs)}")
    x = _stack_inputs(inputs)
    n = x.value.value.shape[0]
    act = _ACTIVATIONS[config.activation]

    def affine(xj, w, b):
        value = tp.matmul(xj.value, w) + b
        d1 = None if xj.d1 is None else tuple(tp.matmul(c, w) for c in xj.d1)
        d2 = None if xj.d2 is None else tuple(tp.matmul(c, w) for c in xj.d2)
        return Jet2(value, d1, d2, xj.dim)

    for w, b in leaves[:-1]:
        x = act(affine(x, w, b))
    w, b = leaves[-1]
    out = affine(x, w, b)

    def sq(c):
        return tp.reshape(c, (n,))

    return Jet2(sq(out.value),
                None if out.d1 is None else tuple(sq(c) for c in out.d1),
                None if out.d2 is None else tuple(sq(c) for c in out.d2),
                out.dim)


def forward_value(theta: np.ndarray, config: MlpConfig, x: np.ndarray) -> np.ndarray:
    """Plain forward pass (no jets, no tape); bitwise equal to the jet value."""
    x = np.asarray(x, dtype=np.float64).reshape(-1, config.input_dim)
    h = x
    layers = unflatten(theta, config)
    for w, b in layers[:-1]:
        h = h @ w + b
        if config.activation == "tanh":
            h = np.tanh(h)
        else:
            h = h * (0.5 * (np.tanh(0.5 * h) + 1.0))
    w, b = layers[-1]
    return (h @ w + b).reshape(-1)


def raw_network(config: MlpConfig):
    """The unconstrained MLP as a network function."""
    def f(tape, leaves, z_jets):
        return forward_jet(tape, leaves, config, z_jets)
    return f


def split_half(tape: Tape, a: Var, n: int) -> tuple[Var, Var]:
    """Split a (2n,) var into its top and bottom halves (one fused node)."""
    vals = (a.value[:n], a.value[n:])

    def backward(gs):
        gt, gb = gs
        out = np.zeros_like(a.value)
        if gt is not None:
            out[:n] = gt
        if gb is not None:
            out[n:] = gb
        return (out,)

    top, bot = tape.record(vals, (a,), backward, a.needs_grad, "split")
    return top, bot


def parity_parts(tape: Tape, leaves, config: MlpConfig, z_jets: list[Jet2],
                 axis: int = 0) -> tuple[Jet2, Jet2]:
    """Both parity parts in `axis` from one stacked forward pass.

    Rows [0, n) evaluate the raw network at z, rows [n, 2n) at z with the
    axis flipped (input jets sign-flipped on that axis, so the output jet of
    the bottom half is the jet of f(..., -z_axis, ...) as a function of z).
    Returns (even, odd) = ((f+ +- f-)/2).
    """
    n = np.atleast_1d(z_jets[0].value.value).shape[0]
    order = min(j.order for j in z_jets)

    def stacked_jet(j: Jet2, flip: bool) -> Jet2:
        sgn = -1.0 if flip else 1.0

        def cat(c):
            v = np.atleast_1d(c.value)
            return np.concatenate([v, sgn * v])

        value = tape.constant(cat(j.value), tag="stack")
        d1 = d2 = None
        if order >= 1:
            d1 = tuple(tape.constant(cat(c), tag="stack") for c in j.d1)
        if order >= 2:
            d2 = tuple(tape.constant(cat(c), tag="stack") for c in j.d2)
        return Jet2(value, d1, d2, j.dim)

    stacked = [stacked_jet(j, k == axis) for k, j in enumerate(z_jets)]
    out = forward_jet(tape, leaves, config, stacked)

    def halves(c: Var) -> tuple[Var, Var]:
        return split_half(tape, c, n)

    comps = [out.value]
    if order >= 1:
        comps += list(out.d1)
    if order >= 2:
        comps += list(out.d2)
    even_c, odd_c = [], []
    for c in comps:
        top, bot = halves(c)
        even_c.append((top + bot) * 0.5)
        odd_c.append((top - bot) * 0.5)

    dim = z_jets[0].dim

    def to_jet(cs):
        d1 = tuple(cs[1:1 + dim]) if order >= 1 else None
        d2 = tuple(cs[1 + dim:]) if order >= 2 else None
        return Jet2(cs[0], d1, d2, dim)

    return to_jet(even_c), to_jet(odd_c)


# ---------------------------------------------------------------------------
# Hard-constraint wrappers
# ---------------------------------------------------------------------------

def apply_parity(raw, axis: int, sign: str):
    """Symmetrize: (f(.., z_a, ..) +/- f(.., -z_a, ..)) / 2 via two passes."""
    if sign not in ("odd", "even"):
        raise ConfigError(f"parity sign must be odd or even, got '{sign}'")

    def f(tape, leaves, z_jets):
        plus = raw(tape, leaves, z_jets)
        flipped = list(z_jets)
        flipped[axis] = J.jet_neg(z_jets[axis])
        minus = raw(tape, leaves, flipped)
        comb = J.jet_sub(plus, minus) if sign == "odd" else J.jet_add(plus, minus)
        return J.jet_scale(comb, 0.5)

    return f


def apply_constraints(config: MlpConfig, spec: ConstraintSpec):
    """Parity wrapping per axis (Taylor/asymptotics wrappers are composed
    by the problem definitions, which own the surrounding structure)."""
    f = raw_network(config)
    for axis, p in enumerate(spec.parity):
        if p != "none":
            f = apply_parity(f, axis, p)
    return f


def taylor_burgers_combine(z: Jet2, u1: Jet2) -> Jet2:
    """-z + z^3 + z^4 * u1 composed through jet arithmetic."""
    z2 = J.jet_mul(z, z)
    z3 = J.jet_mul(z2, z)
    z4 = J.jet_mul(z2, z2)
    return J.jet_add(J.jet_sub(z3, z), J.jet_mul(z4, u1))


def apply_taylor_burgers(inner):
    """z -> -z + z^3 + z^4 * inner(z); pins U(0)=0, U'(0)=-1, U'''(0)=6."""

    def f(tape, leaves, z_jets):
        return taylor_burgers_combine(z_jets[0], inner(tape, leaves, z_jets))

    return f


def taylor_boussinesq_combine(z1: Jet2, z2: Jet2, o1: Jet2, o2: Jet2) -> Jet2:
    """-z1 + z1 z2 o1 + z1^2 o2 composed through jet arithmetic."""
    term1 = J.jet_mul(J.jet_mul(z1, z2), o1)
    term2 = J.jet_mul(J.jet_mul(z1, z1), o2)
    return J.jet_add(J.jet_sub(term1, z1), term2)


def apply_taylor_boussinesq(omega1, omega2):
    """(z1, z2) -> -z1 + z1 z2 omega1 + z1^2 omega2.

    omega1 must be even and omega2 odd in z1; the composite is then odd in
    z1 with d/dz1 at the origin exactly -1.
    """

    def f(tape, leaves, z_jets):
        o1 = omega1(tape, leaves, z_jets)
        o2 = omega2(tape, leaves, z_jets)
        return taylor_boussinesq_combine(z_jets[0], z_jets[1], o1, o2)

    return f


def cutoff_tail_jets(z: np.ndarray, lam: float, cutoff_power: int
                     ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value, d/dz, d2/dz2 of the far-field tail (chi*g)(sinh z).

    chi = (y/(1+y))^q and g = -y^(lam/(1+lam)) fuse into the single guarded
    composite -y^(q + p) / (1+y)^q with p = lam/(1+lam); it vanishes to
    order q at y=0, so the jets there are exactly zero. Negative y uses the
    odd extension. Evaluated in exp/log form to avoid overflow at y ~ 1e13.
    """
    if lam <= 0:
        raise ConfigError(f"decay exponent must be positive, got {lam}")
    z = np.asarray(z, dtype=np.float64)
    q = float(cutoff_power)
    p = lam / (1.0 + lam)
    m = q + p
    y_signed = np.sinh(z)
    sign = np.sign(y_signed)
    y = np.abs(y_signed)
    val = np.zeros_like(z)
    dy1 = np.zeros_like(z)
    dy2 = np.zeros_like(z)
    pos = y > 0.0
    if np.any(pos):
        yp = y[pos]
        logy = np.log(yp)
        # exponent m*log(y) - q*log(1+y) rewritten per branch so both terms
        # stay small; the naive form loses ~m*log(y)*eps of relative accuracy
        # at large y, which the far-field residual cancellation amplifies
        big = yp >= 1.0
        base = np.where(big,
                        p * logy - q * np.log1p(1.0 / yp),
                        m * logy - q * np.log1p(yp))
        r = yp / (1.0 + yp)
        v = -np.exp(base)
        val[pos] = v
        # derivatives from v by division, not by re-exponentiating with the
        # large log(y) in the exponent (that would cost ~m*log(y)*eps of
        # relative accuracy, amplified by the far-field cancellation)
        dy1[pos] = v * (m - q * r) / yp
        dy2[pos] = v * (m * (m - 1.0) - 2.0 * m * q * r
                        + q * (q + 1.0) * r * r) / yp / yp
    # odd extension: value and second derivative flip sign, slope does not
    val *= sign
    dy2 *= sign
    c = np.cosh(z)
    s = np.sinh(z)
    return val, dy1 * c, dy2 * c * c + dy1 * s


def cutoff_tail_value(y: np.ndarray, lam: float, cutoff_power: int) -> np.ndarray:
    """(chi*g)(y) alone, for evaluation tooling working directly in y."""
    return cutoff_tail_jets(np.arcsinh(np.asarray(y, dtype=np.float64)),
                            lam, cutoff_power)[0]


def apply_exact_asymptotics(inner, lam: float, cutoff_power: int = 15):
    """z -> inner(z) + (chi*g)(sinh z); the tail carries no parameters."""
    if lam <= 0:
        raise ConfigError(f"decay exponent must be positive, got {lam}")

    def f(tape, leaves, z_jets):
        u_tilde = inner(tape, leaves, z_jets)
        zv = z_jets[0].value.value
        order = u_tilde.order
        val, d1, d2 = cutoff_tail_jets(zv, lam, cutoff_power)
        tail = J.constant_jet(
            tape, val,
            d1=None if order < 1 else (d1,),
            d2=None if order < 2 else (d2,),
            dim=1,
        )
        return J.jet_add(u_tilde, tail)

    return f


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def config_hash(meta: dict) -> str:
    """Stable hash of the problem-defining metadata."""
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def save_checkpoint(path: str | Path, theta: np.ndarray, meta: dict,
                    lam: float | None = None) -> None:
    """Binary checkpoint + JSON sidecar.

    Layout: magic, u32 version, 64-byte hex config hash, u8 lambda flag,
    u64 count, count little-endian float64, then lambda as float64 if
    trainable. The sidecar holds the metadata the hash covers.
    """
    path = Path(path)
    h = config_hash(meta)
    theta = np.ascontiguousarray(theta, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(h.encode("ascii"))
        fh.write(struct.pack("<B", 1 if lam is not None else 0))
        fh.write(struct.pack("<Q", theta.size))
        fh.write(theta.tobytes())
        if lam is not None:
            fh.write(struct.pack("<d", lam))
    sidecar = dict(meta)
    sidecar["config_hash"] = h
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path: str | Path) -> tuple[np.ndarray, dict, float | None]:
    """Load and verify a checkpoint; returns (theta, meta, lambda-or-None)."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise ConfigError(f"{path}: not a checkpoint (bad magic)")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CHECKPOINT_VERSION:
            raise ConfigError(f"{path}: unsupported checkpoint version {version}")
        stored_hash = fh.read(64).decode("ascii")
        (has_lam,) = struct.unpack("<B", fh.read(1))
        (count,) = struct.unpack("<Q", fh.read(8))
        theta = np.frombuffer(fh.read(count * 8), dtype="<f8").copy()
        lam = struct.unpack("<d", fh.read(8))[0] if has_lam else None
    sidecar_path = path.with_suffix(".json")
    if not sidecar_path.exists():
        raise ConfigError(f"missing checkpoint sidecar {sidecar_path}")
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    meta = {k: v for k, v in sidecar.items() if k != "config_hash"}
    if config_hash(meta) != stored_hash:
        raise ConfigError(
            f"{path}: sidecar does not match checkpoint config hash; refusing to load"
        )
    return theta, meta, lam
