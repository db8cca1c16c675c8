"""Toroidal 2D world geometry.

Positions live on a flat torus of size width x height. All distances and
displacements are wrap-aware: the reported separation between two points is
the minimum over periodic images. Mating zones are circles on the torus that
can be resampled uniformly at random.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WorldConfig:
    """Rectangular world with periodic boundaries, in meters."""

    width: float = 25.0
    height: float = 25.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("world dimensions must be positive")

    @property
    def half_diagonal(self) -> float:
        """Largest possible periodic distance between two points."""
        return math.hypot(self.width / 2.0, self.height / 2.0)


@dataclass(frozen=True)
class Position:
    """A point already wrapped into [0, width) x [0, height)."""

    x: float
    y: float


@dataclass(frozen=True)
class MatingZone:
    """Circular region inside which reproduction is permitted."""

    center: Position
    radius: float = 2.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("zone radius must be positive")


@dataclass(frozen=True)
class DensityKernelConfig:
    """Gaussian kernel used to measure local crowding."""

    kernel_width: float = 3.0

    def __post_init__(self):
        if self.kernel_width <= 0:
            raise ValueError("kernel width must be positive")


def _wrap_scalar(v: float, period: float) -> float:
    w = v % period
    # Float modulo can round to exactly `period` for tiny negative inputs.
    return 0.0 if w >= period else w


def wrap_position(x: float, y: float, world: WorldConfig) -> Position:
    """Map raw coordinates into [0, W) x [0, H). Idempotent."""
    return Position(_wrap_scalar(x, world.width), _wrap_scalar(y, world.height))


def _axis_distance(a: float, b: float, period: float) -> float:
    d = abs(a - b)
    return min(d, period - d)


def periodic_distance(a: Position, b: Position, world: WorldConfig) -> float:
    """Shortest distance between two wrapped points on the torus."""
    dx = _axis_distance(a.x, b.x, world.width)
    dy = _axis_distance(a.y, b.y, world.height)
    return math.hypot(dx, dy)


def _axis_displacement(src: float, dst: float, period: float) -> float:
    d = (dst - src) % period
    if d > period / 2.0:
        d -= period
    return d


def periodic_displacement(src: Position, dst: Position, world: WorldConfig) -> tuple[float, float]:
    """Shortest wrap-aware vector v such that src + v wraps to dst."""
    return (
        _axis_displacement(src.x, dst.x, world.width),
        _axis_displacement(src.y, dst.y, world.height),
    )


def pairwise_periodic_distances(positions: np.ndarray, world: WorldConfig) -> np.ndarray:
    """Full (n, n) periodic distance matrix for an (n, 2) position array."""
    pos = np.asarray(positions, dtype=float)
    dx = np.abs(pos[:, None, 0] - pos[None, :, 0])
    dy = np.abs(pos[:, None, 1] - pos[None, :, 1])
    dx = np.minimum(dx, world.width - dx)
    dy = np.minimum(dy, world.height - dy)
    return np.hypot(dx, dy)


def local_density(
    index: int,
    positions: list[Position],
    kernel: DensityKernelConfig,
    world: WorldConfig,
) -> float:
    """Gaussian-weighted count of neighbors around ``positions[index]``.

    Each other agent at periodic distance d contributes exp(-d^2 / (2 s^2))
    where s is the kernel width; an isolated agent has density 0.
    """
    me = positions[index]
    two_s2 = 2.0 * kernel.kernel_width**2
    total = 0.0
    for j, other in enumerate(positions):
        if j == index:
            continue
        d = periodic_distance(me, other, world)
        total += math.exp(-(d * d) / two_s2)
    return total


def local_densities(positions: np.ndarray, kernel: DensityKernelConfig, world: WorldConfig) -> np.ndarray:
    """Vectorized local density for every row of an (n, 2) position array."""
    pos = np.asarray(positions, dtype=float)
    n = len(pos)
    if n <= 1:
        return np.zeros(n)
    d = pairwise_periodic_distances(pos, world)
    k = np.exp(-(d * d) / (2.0 * kernel.kernel_width**2))
    np.fill_diagonal(k, 0.0)
    return k.sum(axis=1)


def zone_membership(p: Position, zones: list[MatingZone], world: WorldConfig) -> int | None:
    """Index of the first zone whose disc contains p (boundary inclusive)."""
    for k, zone in enumerate(zones):
        if periodic_distance(p, zone.center, world) <= zone.radius:
            return k
    return None


def relocate_zone(zone: MatingZone, rng: np.random.Generator, world: WorldConfig) -> MatingZone:
    """Same radius, fresh center sampled uniformly over the world."""
    cx = rng.uniform(0.0, world.width)
    cy = rng.uniform(0.0, world.height)
    return MatingZone(center=wrap_position(cx, cy, world), radius=zone.radius)


def random_zones(
    count: int, radius: float, rng: np.random.Generator, world: WorldConfig
) -> list[MatingZone]:
    """Place ``count`` zones of the given radius uniformly at random."""
    zones = []
    for _ in range(count):
        cx = rng.uniform(0.0, world.width)
        cy = rng.uniform(0.0, world.height)
        zones.append(MatingZone(center=wrap_position(cx, cy, world), radius=radius))
    return zones
