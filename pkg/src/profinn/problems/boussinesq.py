"""2D Boussinesq self-similar profile system on the half plane y2 >= 0.

Five fields (omega, u1, u2, phi, psi) with parities in y1 of
(odd, odd, even, odd, even); omega additionally carries the Taylor
nondegeneracy ansatz pinning d(omega)/dy1 = -1 at the origin. Six equation
residuals: three transport equations and three pointwise constraints
(divergence-free, vorticity definition, psi/phi compatibility). The scaling
exponent lambda is trainable and stored as the last entry of the parameter
vector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import jets as J
from .. import network as net
from ..domain import SamplerSpec, boundary_sample, sample
from ..errors import ConfigError
from ..jets import Jet2
from ..loss import LossWeights, ResidualSet, assemble
from ..network import ConstraintSpec, MlpConfig
from ..tape import Tape, Var
from . import chunk_ranges, coord_jet, invcosh_jet, y_derivative

FIELDS = ("omega", "u1", "u2", "phi", "psi")
PARITY = {"omega": "odd", "u1": "odd", "u2": "even", "phi": "odd", "psi": "even"}


def boussinesq_residual_jets(tape: Tape, fields: dict[str, Jet2],
                             z1: np.ndarray, z2: np.ndarray, lam) -> list[Jet2]:
    """All six residuals from order-n field jets, each carried to order n-1.

    `lam` may be a float (frozen) or a scalar Var (trainable).
    """
    order = fields["omega"].order - 1
    ic1 = invcosh_jet(tape, z1, 0, 2, order)
    ic2 = invcosh_jet(tape, z2, 1, 2, order)
    y1 = coord_jet(tape, z1, 0, 2, order)
    y2 = coord_jet(tape, z2, 1, 2, order)

    omega = J.truncate(fields["omega"], order)
    u1 = J.truncate(fields["u1"], order)
    u2 = J.truncate(fields["u2"], order)
    phi = J.truncate(fields["phi"], order)
    psi = J.truncate(fields["psi"], order)

    def dy(name, axis):
        return y_derivative(fields[name], ic1 if axis == 0 else ic2, axis)

    one_plus_lam = lam + 1.0 if isinstance(lam, Var) else float(lam) + 1.0
    adv1 = J.jet_add(J.jet_scale(y1, one_plus_lam), u1)
    adv2 = J.jet_add(J.jet_scale(y2, one_plus_lam), u2)

    def transport(name):
        return J.jet_add(J.jet_mul(adv1, dy(name, 0)), J.jet_mul(adv2, dy(name, 1)))

    d1u1 = dy("u1", 0)
    d2u1 = dy("u1", 1)
    d1u2 = dy("u2", 0)
    d2u2 = dy("u2", 1)
    d1psi = dy("psi", 0)
    d2phi = dy("phi", 1)

    r1 = J.jet_sub(J.jet_add(omega, transport("omega")), phi)
    r2 = J.jet_add(
        J.jet_add(J.jet_mul(J.jet_affine(d1u1, 1.0, 2.0), phi), transport("phi")),
        J.jet_mul(d1u2, psi))
    r3 = J.jet_add(
        J.jet_add(J.jet_mul(J.jet_affine(d2u2, 1.0, 2.0), psi), transport("psi")),
        J.jet_mul(d2u1, phi))
    r4 = J.jet_add(d1u1, d2u2)
    r5 = J.jet_sub(J.jet_sub(d1u2, d2u1), omega)
    r6 = J.jet_sub(d1psi, d2phi)
    return [r1, r2, r3, r4, r5, r6]


RESIDUAL_NAMES = ("r1", "r2", "r3", "r4", "r5", "r6")


@dataclass
class BoussinesqProblem:
    """Five-network Boussinesq profile problem with trainable lambda."""

    config: MlpConfig = None
    lam_init: float = 2.0
    lam_clamp: tuple[float, float] | None = None
    z_max: float = 30.0
    interior_batch: int = 5000
    smoothness_batch: int = 5000
    boundary_batch: int = 1000
    interior_regions: tuple = ()
    smoothness_regions: tuple = ()

    name = "boussinesq"
    lambda_trainable = True
    residual_names = RESIDUAL_NAMES

    def __post_init__(self):
        if self.config is None:
            self.config = MlpConfig(input_dim=2, hidden_layers=7, width=30,
                                    activation="silu")
        if self.config.input_dim != 2:
            raise ConfigError("Boussinesq networks take 2 inputs")
        if not self.interior_regions:
            m, s = self.z_max, min(5.0, self.z_max)
            self.interior_regions = ((((0.0, m), (0.0, m)), 0.5),
                                     (((0.0, s), (0.0, s)), 0.5))
        if not self.smoothness_regions:
            a, b = min(3.0, self.z_max), min(0.5, self.z_max)
            self.smoothness_regions = ((((0.0, a), (0.0, a)), 0.5),
                                       (((0.0, b), (0.0, b)), 0.5))

    def constraint_specs(self) -> dict[str, ConstraintSpec]:
        return {
            name: ConstraintSpec(
                parity=(PARITY[name], "none"),
                taylor="boussinesq_omega" if name == "omega" else "none",
                asymptotics="weak",
            )
            for name in FIELDS
        }

    def theta_size(self) -> int:
        return 5 * self.config.param_count() + 1

    def init_theta(self, seed: int) -> np.ndarray:
        chunks = [net.init_params(replace(self.config, seed=(seed * 7 + k)))
                  for k in range(5)]
        chunks.append(np.array([self.lam_init]))
        return np.concatenate(chunks)

    def lam_of(self, theta: np.ndarray) -> float:
        return float(theta[-1])

    def clamp_theta(self, theta: np.ndarray) -> np.ndarray:
        if self.lam_clamp is not None:
            lo, hi = self.lam_clamp
            theta[-1] = min(max(theta[-1], lo), hi)
        return theta

    def meta(self) -> dict:
        return {
            "problem": self.name,
            "lambda": {"mode": "trainable", "init": self.lam_init,
                       "clamp": list(self.lam_clamp) if self.lam_clamp else None},
            "z_max": self.z_max,
            "network": self.config.to_dict(),
            "constraints": {k: v.to_dict() for k, v in self.constraint_specs().items()},
        }

    # -- sampling -------------------------------------------------------------

    def sample_batches(self, seed: int, epoch: int) -> dict:
        spec_i = SamplerSpec("interior", self.interior_regions,
                             self.interior_batch, seed)
        spec_s = SamplerSpec("smoothness", self.smoothness_regions,
                             self.smoothness_batch, seed + 1)
        return {
            "interior": sample(spec_i, epoch),
            "smoothness": sample(spec_s, epoch),
            "edges": boundary_sample(self.z_max, self.boundary_batch, seed + 2, epoch),
        }

    # -- evaluation -------------------------------------------------------------

    def register(self, tape: Tape, theta: np.ndarray):
        if theta.size != self.theta_size():
            raise ConfigError(
                f"parameter vector has length {theta.size}, expected {self.theta_size()}")
        leaves = {}
        n = self.config.param_count()
        for k, name in enumerate(FIELDS):
            leaves[name] = net.register_params(tape, theta[k * n:(k + 1) * n], self.config)
        lam_var = tape.leaf(np.float64(theta[-1]), param=True, tag="lambda")
        return leaves, lam_var

    def field_jets(self, tape, leaves, z1, z2, order, names=FIELDS) -> dict[str, Jet2]:
        """Each requested field from one stacked parity pass of its network;
        the omega ansatz consumes both parity parts of its net."""
        z_jets = [J.seed_input(tape, np.asarray(z1, float), 0, 2, order=order),
                  J.seed_input(tape, np.asarray(z2, float), 1, 2, order=order)]
        out = {}
        for name in names:
            even, odd = net.parity_parts(tape, leaves[name], self.config, z_jets,
                                         axis=0)
            if name == "omega":
                out[name] = net.taylor_boussinesq_combine(z_jets[0], z_jets[1],
                                                          even, odd)
            elif PARITY[name] == "odd":
                out[name] = odd
            else:
                out[name] = even
        return out

    def interior_set(self, tape, ctx, z1, z2) -> ResidualSet:
        leaves, lam_var = ctx
        fj = self.field_jets(tape, leaves, z1, z2, 1)
        rs = boussinesq_residual_jets(tape, fj, z1, z2, lam_var)
        return ResidualSet("interior", [r.value for r in rs])

    def smoothness_set(self, tape, ctx, z1, z2) -> ResidualSet:
        leaves, lam_var = ctx
        fj = self.field_jets(tape, leaves, z1, z2, 2)
        rs = boussinesq_residual_jets(tape, fj, z1, z2, lam_var)
        return ResidualSet("smoothness", [r.value for r in rs],
                           grads=[r.d1 for r in rs])

    def wall_set(self, tape, leaves, z1, z2) -> ResidualSet:
        fj = self.field_jets(tape, leaves, z1, z2, 0, names=("u2",))
        return ResidualSet("boundary:z2=0", [fj["u2"].value])

    def far_edge_set(self, tape, leaves, name, z1, z2) -> ResidualSet:
        fj = self.field_jets(tape, leaves, z1, z2, 1,
                             names=("u1", "u2", "phi", "psi"))
        ic1 = 1.0 / np.cosh(z1)
        ic2 = 1.0 / np.cosh(z2)
        residuals = [
            fj["phi"].value,
            fj["psi"].value,
            fj["u1"].d1[0] * ic1,
            fj["u1"].d1[1] * ic2,
            fj["u2"].d1[0] * ic1,
            fj["u2"].d1[1] * ic2,
        ]
        return ResidualSet(f"boundary:{name}", residuals)

    def boundary_sets(self, tape, leaves, edges) -> list[ResidualSet]:
        """Wall: non-penetration u2 = 0 on z2=0. Far field (z1=max, z2=max):
        Dirichlet phi = psi = 0 and Neumann grad(u1, u2) = 0 in z-converted
        form. The z1=0 edge carries no conditions; parity already enforces
        the odd fields there."""
        wall = edges["z2=0"]
        sets = [self.wall_set(tape, leaves, wall.axis(0), wall.axis(1))]
        for name in ("z1=max", "z2=max"):
            b = edges[name]
            sets.append(self.far_edge_set(tape, leaves, name, b.axis(0), b.axis(1)))
        return sets

    def residual_sets(self, tape, leaves, lam_var, batches) -> list[ResidualSet]:
        bi = batches["interior"]
        bs = batches["smoothness"]
        ctx = (leaves, lam_var)
        sets = [
            self.interior_set(tape, ctx, bi.axis(0), bi.axis(1)),
            self.smoothness_set(tape, ctx, bs.axis(0), bs.axis(1)),
        ]
        sets.extend(self.boundary_sets(tape, leaves, batches["edges"]))
        return sets

    def residual_counts(self, batches: dict) -> dict:
        n_edge = {k: b.size for k, b in batches["edges"].items()}
        n_b = n_edge["z2=0"] + 6 * (n_edge["z1=max"] + n_edge["z2=max"])
        return {"interior": batches["interior"].size,
                "smoothness": batches["smoothness"].size,
                "boundary": n_b}

    def pieces(self, batches: dict, chunk_rows: int):
        out = []
        bi = batches["interior"]
        for lo, hi in chunk_ranges(bi.size, chunk_rows):
            out.append(lambda tape, ctx, a=bi.axis(0)[lo:hi], b=bi.axis(1)[lo:hi]:
                       [self.interior_set(tape, ctx, a, b)])
        bs = batches["smoothness"]
        for lo, hi in chunk_ranges(bs.size, chunk_rows):
            out.append(lambda tape, ctx, a=bs.axis(0)[lo:hi], b=bs.axis(1)[lo:hi]:
                       [self.smoothness_set(tape, ctx, a, b)])
        wall = batches["edges"]["z2=0"]
        for lo, hi in chunk_ranges(wall.size, chunk_rows):
            out.append(lambda tape, ctx, a=wall.axis(0)[lo:hi], b=wall.axis(1)[lo:hi]:
                       [self.wall_set(tape, ctx[0], a, b)])
        for name in ("z1=max", "z2=max"):
            edge = batches["edges"][name]
            for lo, hi in chunk_ranges(edge.size, chunk_rows):
                out.append(lambda tape, ctx, nm=name, a=edge.axis(0)[lo:hi],
                           b=edge.axis(1)[lo:hi]:
                           [self.far_edge_set(tape, ctx[0], nm, a, b)])
        return out

    def build_loss(self, tape: Tape, theta: np.ndarray, batches: dict,
                   weights: LossWeights, boundary_per_condition: bool = False):
        leaves, lam_var = self.register(tape, theta)
        sets = self.residual_sets(tape, leaves, lam_var, batches)
        return assemble(sets, weights, boundary_per_condition)

    # -- numpy-level grid evaluation -------------------------------------------

    def residual_values(self, theta: np.ndarray, z1: np.ndarray,
                        z2: np.ndarray) -> list[np.ndarray]:
        tape = Tape()
        leaves, lam_var = self.register(tape, theta)
        fj = self.field_jets(tape, leaves, z1, z2, 1)
        rs = boussinesq_residual_jets(tape, fj, np.asarray(z1, float),
                                      np.asarray(z2, float), lam_var)
        return [r.value.value for r in rs]

    def grid_columns(self, theta: np.ndarray, z1: np.ndarray,
                     z2: np.ndarray) -> dict[str, np.ndarray]:
        z1 = np.asarray(z1, dtype=np.float64)
        z2 = np.asarray(z2, dtype=np.float64)
        tape = Tape()
        leaves, lam_var = self.register(tape, theta)
        fj = self.field_jets(tape, leaves, z1, z2, 1)
        rs = boussinesq_residual_jets(tape, fj, z1, z2, lam_var)
        cols = {"z1": z1, "z2": z2, "y1": np.sinh(z1), "y2": np.sinh(z2)}
        for name, r in zip(RESIDUAL_NAMES, rs):
            cols[name] = r.value.value
        for name in FIELDS:
            cols[name] = fj[name].value.value
        return cols
