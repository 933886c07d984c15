"""Sinh change of variables and collocation samplers.

Training happens in bounded z-coordinates with y = sinh(z) per axis, so a
uniform draw in z is an exponential "mesh" in y: z in [0, 30] covers
y up to about 5e12. Samplers are pure functions of (spec, seed, epoch) and
therefore safe to call from anywhere without shared state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


def to_y(z):
    """y = sinh(z), strictly increasing bijection with dy/dz >= 1."""
    return np.sinh(z)


def to_z(y):
    """Inverse map, the log-form arcsinh."""
    return np.arcsinh(y)


def chain_factors(z):
    """(dy/dz, d2y/dz2) = (cosh z, sinh z); consumers build 1/cosh factors."""
    z = np.asarray(z, dtype=np.float64)
    return np.cosh(z), np.sinh(z)


def resample_due(epoch: int, period: int) -> bool:
    """Fresh collocation points are due after every `period` completed epochs."""
    if period < 1:
        raise ConfigError(f"resample period must be >= 1, got {period}")
    return epoch > 0 and epoch % period == 0


@dataclass(frozen=True)
class SamplerSpec:
    """Mixture of uniform boxes in z-coordinates for one point role.

    regions: list of (box, weight); a box is ((lo, hi), ...) per axis.
    """

    role: str
    regions: tuple[tuple[tuple[tuple[float, float], ...], float], ...]
    batch_size: int
    seed: int

    def __post_init__(self):
        if not self.regions:
            raise ConfigError("sampler needs at least one region")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        total = sum(w for _, w in self.regions)
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"region weights must sum to 1, got {total}")
        dims = {len(box) for box, _ in self.regions}
        if len(dims) != 1:
            raise ConfigError("all regions must share the same dimension")

    @property
    def dim(self) -> int:
        return len(self.regions[0][0])

    @classmethod
    def uniform(cls, role: str, box, batch_size: int, seed: int) -> "SamplerSpec":
        box = tuple(tuple(map(float, ax)) for ax in box)
        return cls(role, ((box, 1.0),), batch_size, seed)


@dataclass
class SampleBatch:
    """Collocation points (shape (N, dim)) tagged by role and birth epoch."""

    points: np.ndarray
    role: str
    epoch: int

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def axis(self, k: int) -> np.ndarray:
        return self.points[:, k]


def _rng_for(seed: int, epoch: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, epoch, stream))))


def sample(spec: SamplerSpec, epoch: int) -> SampleBatch:
    """Draw batch_size points: pick a region by weight, then uniform in it.

    Deterministic in (spec.seed, epoch).
    """
    rng = _rng_for(spec.seed, epoch, 0)
    weights = np.array([w for _, w in spec.regions])
    idx = rng.choice(len(spec.regions), size=spec.batch_size, p=weights)
    u = rng.random(size=(spec.batch_size, spec.dim))
    lows = np.array([[lo for lo, _ in box] for box, _ in spec.regions])
    highs = np.array([[hi for _, hi in box] for box, _ in spec.regions])
    points = lows[idx] + u * (highs[idx] - lows[idx])
    return SampleBatch(points, spec.role, epoch)


def boundary_sample(square_side: float, points_per_edge: int, seed: int,
                    epoch: int) -> dict[str, SampleBatch]:
    """Uniform samples on the four edges of [0, side]^2 in z-coordinates.

    Keys are 'z1=0', 'z1=max', 'z2=0', 'z2=max'. The z1=0 edge is produced
    for completeness; parity constraints make most conditions automatic
    there.
    """
    if square_side <= 0:
        raise ConfigError("square_side must be positive")
    out = {}
    for stream, (name, fixed_axis, fixed_val) in enumerate([
        ("z1=0", 0, 0.0),
        ("z1=max", 0, square_side),
        ("z2=0", 1, 0.0),
        ("z2=max", 1, square_side),
    ]):
        rng = _rng_for(seed, epoch, 100 + stream)
        free = rng.uniform(0.0, square_side, size=points_per_edge)
        pts = np.empty((points_per_edge, 2))
        pts[:, fixed_axis] = fixed_val
        pts[:, 1 - fixed_axis] = free
        out[name] = SampleBatch(pts, f"boundary:{name}", epoch)
    return out
