"""1D Burgers self-similar profile: residual, boundary terms, analytic oracle.

Profile equation in y: -lam*U + ((1+lam)*y + U) * U_y = 0, with U odd and
the scaling exponent lam fixed. In z-variables (y = sinh z) the residual is
-lam*U + ((1+lam)*sinh z + U) * U_z / cosh z. The implicit solution family
y + U + C*U^(1+1/lam) = 0 provides an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import jets as J
from .. import network as net
from ..domain import SampleBatch, SamplerSpec, sample
from ..errors import ConfigError, OracleError
from ..jets import Jet2
from ..loss import LossWeights, ResidualSet, assemble
from ..network import ConstraintSpec, MlpConfig
from ..tape import Tape
from . import chunk_ranges, coord_jet, invcosh_jet, y_derivative


def burgers_residual_jet(tape: Tape, u: Jet2, z: np.ndarray, lam: float) -> Jet2:
    """Equation residual from order-n field jets, carried to order n-1."""
    order = u.order - 1
    invc = invcosh_jet(tape, z, 0, 1, order)
    y = coord_jet(tape, z, 0, 1, order)
    u_t = J.truncate(u, order)
    u_y = y_derivative(u, invc, 0)
    adv = J.jet_add(J.jet_scale(y, 1.0 + lam), u_t)
    return J.jet_sub(J.jet_mul(adv, u_y), J.jet_scale(u_t, lam))


# ---------------------------------------------------------------------------
# Analytic oracle: y + U + C*U^(1+1/lam) = 0, odd branch with U*y <= 0.
# ---------------------------------------------------------------------------

def _phi_and_slope(u: float, y: float, c: float, e: float) -> tuple[float, float]:
    # u <= 0, y >= 0: phi(u) = y + u - c*(-u)^e, strictly increasing
    if u < 0.0:
        return y + u - c * (-u) ** e, 1.0 + c * e * (-u) ** (e - 1.0)
    return y + u, 1.0


def _solve_one(y: float, lam: float, c: float, max_iter: int = 200) -> float:
    if y == 0.0:
        return 0.0
    sign = 1.0 if y > 0 else -1.0
    y = abs(y)
    e = 1.0 + 1.0 / lam
    p = lam / (1.0 + lam)
    tol = 1e-13 * max(1.0, y)

    lo = -min(y, (y / c) ** p)  # near the root already
    phi_lo, _ = _phi_and_slope(lo, y, c, e)
    grow = 0
    while phi_lo > 0.0:
        lo = 2.0 * lo - 1.0
        phi_lo, _ = _phi_and_slope(lo, y, c, e)
        grow += 1
        if grow > 200:
            raise OracleError(f"no bracket for y={y}, lam={lam}, C={c}")
    hi = 0.0  # phi(0) = y > 0

    u = 0.5 * (lo + hi) if phi_lo < 0 else lo
    for _ in range(max_iter):
        phi, dphi = _phi_and_slope(u, y, c, e)
        if abs(phi) <= tol:
            return sign * u
        if phi < 0.0:
            lo = u
        else:
            hi = u
        step = phi / dphi
        u_new = u - step
        if not (lo < u_new < hi):  # Newton left the bracket: bisect
            u_new = 0.5 * (lo + hi)
        if u_new == u:
            return sign * u
        u = u_new
    raise OracleError(
        f"oracle failed to converge for y={y}, lam={lam}, C={c} (|phi|={abs(phi)})"
    )


def burgers_oracle(y, lam: float = 0.5, c: float = 1.0):
    """Profile value U(y) from the implicit relation, odd decreasing branch."""
    if lam <= 0:
        raise ConfigError(f"lam must be positive, got {lam}")
    if c <= 0:
        raise ConfigError(f"C must be positive, got {c}")
    arr = np.asarray(y, dtype=np.float64)
    flat = arr.reshape(-1)
    out = np.array([_solve_one(float(v), lam, c) for v in flat])
    if arr.shape == ():
        return float(out[0])
    return out.reshape(arr.shape)


def burgers_oracle_slope(u, lam: float = 0.5, c: float = 1.0):
    """U_y from implicit differentiation, given oracle values U."""
    e = 1.0 + 1.0 / lam
    au = np.abs(np.asarray(u, dtype=np.float64))
    return -1.0 / (1.0 + c * e * au ** (e - 1.0))


# ---------------------------------------------------------------------------
# Problem definition
# ---------------------------------------------------------------------------

@dataclass
class BurgersProblem:
    """Fixed-lambda Burgers profile in weak or exact asymptotics mode."""

    lam: float = 0.5
    mode: str = "exact"
    config: MlpConfig = None
    cutoff_power: int = 15
    z_max: float = 30.0
    interior_batch: int = 2000
    smoothness_batch: int = 2000
    share_points: bool = False

    name = "burgers"
    lambda_trainable = False

    def __post_init__(self):
        if self.config is None:
            self.config = MlpConfig(input_dim=1, hidden_layers=4, width=20,
                                    activation="tanh")
        if self.mode not in ("weak", "exact"):
            raise ConfigError(f"asymptotics mode must be weak or exact, got '{self.mode}'")
        if self.lam <= 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")

        def inner(tape, leaves, z_jets):
            # odd part of the raw net from one stacked pass
            _, odd = net.parity_parts(tape, leaves, self.config, z_jets, axis=0)
            return odd

        self._inner = inner
        if self.mode == "weak":
            self._field = net.apply_taylor_burgers(inner)
        else:
            self._field = net.apply_exact_asymptotics(
                inner, self.lam, self.cutoff_power)

    def constraint_spec(self) -> ConstraintSpec:
        return ConstraintSpec(
            parity=("odd",),
            taylor="burgers" if self.mode == "weak" else "none",
            asymptotics=self.mode,
            decay_exponent=self.lam if self.mode == "exact" else None,
            cutoff_power=self.cutoff_power,
        )

    def theta_size(self) -> int:
        return self.config.param_count()

    def init_theta(self, seed: int) -> np.ndarray:
        return net.init_params(replace(self.config, seed=seed))

    def lam_of(self, theta: np.ndarray) -> float:
        return self.lam

    def meta(self) -> dict:
        return {
            "problem": self.name,
            "lambda": {"mode": "fixed", "value": self.lam},
            "asymptotics": self.mode,
            "cutoff_power": self.cutoff_power,
            "z_max": self.z_max,
            "network": self.config.to_dict(),
            "constraints": self.constraint_spec().to_dict(),
        }

    # -- sampling -----------------------------------------------------------

    def sample_batches(self, seed: int, epoch: int) -> dict:
        spec_i = SamplerSpec.uniform("interior", [(0.0, self.z_max)],
                                     self.interior_batch, seed)
        batches = {"interior": sample(spec_i, epoch)}
        if self.share_points and self.smoothness_batch == self.interior_batch:
            pts = batches["interior"]
            batches["smoothness"] = SampleBatch(pts.points, "smoothness", pts.epoch)
        else:
            spec_s = SamplerSpec.uniform("smoothness", [(0.0, self.z_max)],
                                         self.smoothness_batch, seed + 1)
            batches["smoothness"] = sample(spec_s, epoch)
        return batches

    # -- loss ---------------------------------------------------------------

    def register(self, tape: Tape, theta: np.ndarray):
        return net.register_params(tape, theta, self.config)

    def field_jet(self, tape: Tape, leaves, z: np.ndarray, order: int) -> Jet2:
        z_jets = [J.seed_input(tape, z, 0, 1, order=order)]
        return self._field(tape, leaves, z_jets)

    def interior_set(self, tape: Tape, leaves, z: np.ndarray) -> ResidualSet:
        u = self.field_jet(tape, leaves, z, order=1)
        r = burgers_residual_jet(tape, u, z, self.lam)
        return ResidualSet("interior", [r.value])

    def smoothness_set(self, tape: Tape, leaves, z: np.ndarray) -> ResidualSet:
        u = self.field_jet(tape, leaves, z, order=2)
        r = burgers_residual_jet(tape, u, z, self.lam)
        return ResidualSet("smoothness", [r.value], grads=[r.d1])

    def boundary_residual(self, tape: Tape, leaves) -> ResidualSet:
        zb = np.array([self.z_max])
        if self.mode == "weak":
            u = self.field_jet(tape, leaves, zb, order=1)
            r = u.d1[0] * (1.0 / np.cosh(zb))
        else:
            # Dirichlet on the network part only, before the tail is added
            z_jets = [J.seed_input(tape, zb, 0, 1, order=0)]
            r = self._inner(tape, leaves, z_jets).value
        return ResidualSet("boundary", [r])

    def residual_sets(self, tape: Tape, leaves, batches: dict) -> list[ResidualSet]:
        return [
            self.interior_set(tape, leaves, batches["interior"].axis(0)),
            self.smoothness_set(tape, leaves, batches["smoothness"].axis(0)),
            self.boundary_residual(tape, leaves),
        ]

    def residual_counts(self, batches: dict) -> dict:
        return {"interior": batches["interior"].size,
                "smoothness": batches["smoothness"].size,
                "boundary": 1}

    def pieces(self, batches: dict, chunk_rows: int):
        out = []
        zi = batches["interior"].axis(0)
        for lo, hi in chunk_ranges(len(zi), chunk_rows):
            out.append(lambda tape, leaves, z=zi[lo:hi]:
                       [self.interior_set(tape, leaves, z)])
        zs = batches["smoothness"].axis(0)
        for lo, hi in chunk_ranges(len(zs), chunk_rows):
            out.append(lambda tape, leaves, z=zs[lo:hi]:
                       [self.smoothness_set(tape, leaves, z)])
        out.append(lambda tape, leaves: [self.boundary_residual(tape, leaves)])
        return out

    def build_loss(self, tape: Tape, theta: np.ndarray, batches: dict,
                   weights: LossWeights, boundary_per_condition: bool = False):
        leaves = self.register(tape, theta)
        sets = self.residual_sets(tape, leaves, batches)
        return assemble(sets, weights, boundary_per_condition)

    # -- numpy-level evaluation (no gradients needed) -------------------------

    def field_values(self, theta: np.ndarray, z: np.ndarray) -> np.ndarray:
        tape = Tape()
        leaves = net.register_params(tape, theta, self.config)
        return self.field_jet(tape, leaves, np.asarray(z, float), order=0).value.value

    def residual_values(self, theta: np.ndarray, z: np.ndarray) -> np.ndarray:
        tape = Tape()
        leaves = net.register_params(tape, theta, self.config)
        u = self.field_jet(tape, leaves, np.asarray(z, float), order=1)
        r = burgers_residual_jet(tape, u, np.asarray(z, float), self.lam)
        return r.value.value

    def grid_columns(self, theta: np.ndarray, z: np.ndarray) -> dict[str, np.ndarray]:
        z = np.asarray(z, dtype=np.float64)
        return {
            "z": z,
            "y": np.sinh(z),
            "r1": self.residual_values(theta, z),
            "u": self.field_values(theta, z),
        }

    residual_names = ("r1",)
