"""Parent selection, movement bias, zone relocation, and death selection.

All operators are deterministic given their inputs and the run-owned rng:
greedy pairing walks ids in ascending order, probabilistic deaths draw one
uniform per individual in ascending id order, and every tie breaks toward the
lower id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .genome import Genome
from .world import (
    MatingZone,
    Position,
    WorldConfig,
    local_densities,
    pairwise_periodic_distances,
    periodic_distance,
    periodic_displacement,
    relocate_zone,
    zone_membership,
)

if TYPE_CHECKING:
    from .controller import SubstrateNetwork

PAIRING_STRATEGIES = ("proximity", "random", "zones")
MOVEMENT_BIAS_MODES = ("nearest_neighbor", "nearest_zone", "assigned_zone", "none")
RELOCATION_POLICIES = ("static", "interval", "event")
DEATH_MECHANISMS = ("fitness", "age", "probabilistic_age", "energy", "density", "parents_die")


@dataclass
class Individual:
    """One agent: the unit of selection.

    The substrate network is a derived cache, not state; heading persists
    across generations so agents keep their orientation between simulations.
    """

    id: int
    genome: Genome
    position: Position
    heading: float = 0.0
    fitness: float | None = None
    age: int = 0
    energy: float = 100.0
    assigned_zone: int | None = None
    network: "SubstrateNetwork | None" = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class ParentSelectionConfig:
    strategy: str = "proximity"
    pairing_radius: float = 10.0
    zone_count: int = 15
    zone_radius: float = 2.0
    relocation: str = "event"
    relocation_interval: int = 5
    movement_bias: str = "none"

    def __post_init__(self):
        if self.strategy not in PAIRING_STRATEGIES:
            raise ValueError(f"unknown pairing strategy: {self.strategy}")
        if self.movement_bias not in MOVEMENT_BIAS_MODES:
            raise ValueError(f"unknown movement bias mode: {self.movement_bias}")
        if self.relocation not in RELOCATION_POLICIES:
            raise ValueError(f"unknown relocation policy: {self.relocation}")
        if self.pairing_radius <= 0:
            raise ValueError("pairing radius must be positive")
        if self.zone_count < 0:
            raise ValueError("zone count must be >= 0")
        if self.zone_radius <= 0:
            raise ValueError("zone radius must be positive")
        if self.relocation == "interval" and self.relocation_interval < 1:
            raise ValueError("relocation interval must be >= 1")

    @property
    def uses_zones(self) -> bool:
        return self.strategy == "zones" or self.movement_bias in ("nearest_zone", "assigned_zone")


@dataclass(frozen=True)
class DeathSelectionConfig:
    mechanism: str = "fitness"
    target_size: int = 30
    max_age: int = 35
    initial_energy: float = 100.0
    energy_depletion: float = 5.0
    mating_energy_delta: float = -25.0  # negative values are costs
    critical_density: float = 5.0
    base_death_prob: float = 0.01
    max_death_prob: float = 0.1
    density_kernel_width: float = 3.0

    def __post_init__(self):
        if self.mechanism not in DEATH_MECHANISMS:
            raise ValueError(f"unknown death mechanism: {self.mechanism}")
        if self.target_size < 0:
            raise ValueError("target size must be >= 0")
        if self.max_age < 1:
            raise ValueError("max age must be >= 1")
        if self.base_death_prob + self.max_death_prob > 1.0:
            raise ValueError("base + max death probability must not exceed 1")
        if self.critical_density <= 0 or self.density_kernel_width <= 0:
            raise ValueError("density parameters must be positive")


@dataclass(frozen=True)
class PairingResult:
    """Disjoint parent pairs plus the zone, if any, each pair formed in."""

    pairs: tuple[tuple[Individual, Individual], ...]
    pair_zones: tuple[int | None, ...]
    mated_zones: frozenset[int] = frozenset()

    def parent_ids(self) -> set[int]:
        return {ind.id for pair in self.pairs for ind in pair}


def pair_proximity(pop: list[Individual], pairing_radius: float, world: WorldConfig) -> PairingResult:
    """Greedy nearest-available pairing within the pairing radius.

    Walk individuals in ascending id; each unpaired one claims its nearest
    unpaired neighbor at periodic distance <= radius (distance ties go to the
    lower id). Unmatchable individuals stay single.
    """
    ordered = sorted(pop, key=lambda ind: ind.id)
    paired: set[int] = set()
    pairs: list[tuple[Individual, Individual]] = []
    for i, me in enumerate(ordered):
        if me.id in paired:
            continue
        best: Individual | None = None
        best_dist = pairing_radius
        for other in ordered:
            if other.id == me.id or other.id in paired:
                continue
            d = periodic_distance(me.position, other.position, world)
            if d < best_dist or (d == best_dist and (best is None or other.id < best.id)):
                best = other
                best_dist = d
        if best is not None:
            pairs.append((me, best))
            paired.add(me.id)
            paired.add(best.id)
    return PairingResult(pairs=tuple(pairs), pair_zones=(None,) * len(pairs))


def pair_random(pop: list[Individual], rng: np.random.Generator) -> PairingResult:
    """Shuffle uniformly and pair consecutive individuals; odd one out stays single."""
    ordered = sorted(pop, key=lambda ind: ind.id)
    perm = rng.permutation(len(ordered))
    shuffled = [ordered[k] for k in perm]
    pairs = tuple(
        (shuffled[k], shuffled[k + 1]) for k in range(0, len(shuffled) - 1, 2)
    )
    return PairingResult(pairs=pairs, pair_zones=(None,) * len(pairs))


def pair_in_zones(pop: list[Individual], zones: list[MatingZone], pairing_radius: float,
                  world: WorldConfig, rng: np.random.Generator) -> PairingResult:
    """Bucket individuals by zone membership, then pair by proximity per zone.

    Overlapping zones resolve to the lowest zone index, so no individual can
    be paired across zones. Also reports which zones hosted a pairing, which
    drives event-driven relocation.
    """
    if not zones:
        raise ValueError("zone pairing requires at least one zone")
    buckets: dict[int, list[Individual]] = {}
    for ind in pop:
        k = zone_membership(ind.position, zones, world)
        if k is not None:
            buckets.setdefault(k, []).append(ind)
    pairs: list[tuple[Individual, Individual]] = []
    pair_zones: list[int | None] = []
    mated: set[int] = set()
    for k in sorted(buckets):
        inside = pair_proximity(buckets[k], pairing_radius, world)
        for pair in inside.pairs:
            pairs.append(pair)
            pair_zones.append(k)
            mated.add(k)
    return PairingResult(pairs=tuple(pairs), pair_zones=tuple(pair_zones), mated_zones=frozenset(mated))


def select_parents(pop: list[Individual], cfg: ParentSelectionConfig, zones: list[MatingZone],
                   world: WorldConfig, rng: np.random.Generator) -> PairingResult:
    if cfg.strategy == "proximity":
        return pair_proximity(pop, cfg.pairing_radius, world)
    if cfg.strategy == "random":
        return pair_random(pop, rng)
    return pair_in_zones(pop, zones, cfg.pairing_radius, world, rng)


def bias_vectors(positions: np.ndarray, mode: str, zone_centers: np.ndarray | None,
                 assigned: np.ndarray | None, world: WorldConfig) -> np.ndarray:
    """Directional input for every agent at once; rows are zero or unit vectors.

    positions: (n, 2) wrapped coordinates. zone_centers: (z, 2) or None.
    assigned: (n,) zone index per agent (-1 for unassigned) or None.
    """
    n = len(positions)
    out = np.zeros((n, 2))
    if n == 0 or mode == "none":
        return out

    if mode == "nearest_neighbor":
        if n < 2:
            return out
        d = pairwise_periodic_distances(positions, world)
        np.fill_diagonal(d, np.inf)
        nearest = np.argmin(d, axis=1)  # distance ties resolve to the lower index
        targets = positions[nearest]
    elif mode == "nearest_zone":
        if zone_centers is None or len(zone_centers) == 0:
            return out
        dx = np.abs(positions[:, None, 0] - zone_centers[None, :, 0])
        dy = np.abs(positions[:, None, 1] - zone_centers[None, :, 1])
        dx = np.minimum(dx, world.width - dx)
        dy = np.minimum(dy, world.height - dy)
        nearest = np.argmin(np.hypot(dx, dy), axis=1)
        targets = zone_centers[nearest]
    elif mode == "assigned_zone":
        if zone_centers is None or len(zone_centers) == 0 or assigned is None:
            return out
        valid = assigned >= 0
        targets = np.zeros_like(positions)
        targets[valid] = zone_centers[assigned[valid]]
        vec = _displacements(positions, targets, world)
        vec[~valid] = 0.0
        return _normalize_rows(vec)
    else:
        raise ValueError(f"unknown movement bias mode: {mode}")

    return _normalize_rows(_displacements(positions, targets, world))


def _displacements(src: np.ndarray, dst: np.ndarray, world: WorldConfig) -> np.ndarray:
    d = dst - src
    d[:, 0] = (d[:, 0] + world.width / 2.0) % world.width - world.width / 2.0
    d[:, 1] = (d[:, 1] + world.height / 2.0) % world.height - world.height / 2.0
    return d


def _normalize_rows(vec: np.ndarray) -> np.ndarray:
    norms = np.hypot(vec[:, 0], vec[:, 1])
    out = np.zeros_like(vec)
    nonzero = norms > 0.0
    out[nonzero] = vec[nonzero] / norms[nonzero, None]
    return out


def movement_bias(individual: Individual, pop: list[Individual], zones: list[MatingZone],
                  mode: str, world: WorldConfig) -> tuple[float, float]:
    """Directional input for one individual; delegates to the vectorized rule."""
    positions = np.array([[ind.position.x, ind.position.y] for ind in pop])
    zone_centers = (
        np.array([[z.center.x, z.center.y] for z in zones]) if zones else None
    )
    assigned = np.array([
        ind.assigned_zone if ind.assigned_zone is not None else -1 for ind in pop
    ])
    index = next(k for k, ind in enumerate(pop) if ind is individual)
    row = bias_vectors(positions, mode, zone_centers, assigned, world)[index]
    return (float(row[0]), float(row[1]))


def relocation_policy(zones: list[MatingZone], policy: str, interval: int,
                      mated_zones: frozenset[int] | set[int], generation: int,
                      rng: np.random.Generator, world: WorldConfig) -> list[MatingZone]:
    """Apply the configured zone relocation rule after a generation's pairings."""
    if policy == "static":
        return list(zones)
    if policy == "interval":
        if generation % interval == 0:
            return [relocate_zone(z, rng, world) for z in zones]
        return list(zones)
    if policy == "event":
        return [
            relocate_zone(z, rng, world) if k in mated_zones else z
            for k, z in enumerate(zones)
        ]
    raise ValueError(f"unknown relocation policy: {policy}")


def density_death_prob(density: float, cfg: DeathSelectionConfig) -> float:
    """Crowding-dependent death probability, saturating at base + max."""
    return cfg.base_death_prob + cfg.max_death_prob * (1.0 - np.exp(-density / cfg.critical_density))


def update_energy(individual: Individual, mated: bool, cfg: DeathSelectionConfig) -> Individual:
    """Per-generation energy bookkeeping: depletion plus the mating delta."""
    delta = cfg.mating_energy_delta if mated else 0.0
    individual.energy = individual.energy - cfg.energy_depletion + delta
    return individual


def apply_death(pop: list[Individual], cfg: DeathSelectionConfig,
                parents: PairingResult | None, densities: np.ndarray | None,
                rng: np.random.Generator) -> list[Individual]:
    """Survival selection. Returns survivors in ascending id order.

    Truncation mechanisms (fitness, age) keep everyone when the target size
    exceeds the population. Probabilistic mechanisms draw one uniform per
    individual in ascending id order so runs replay exactly.
    """
    ordered = sorted(pop, key=lambda ind: ind.id)
    mech = cfg.mechanism

    if mech == "fitness":
        ranked = sorted(ordered, key=lambda ind: (-(ind.fitness or 0.0), ind.id))
        keep = {ind.id for ind in ranked[: cfg.target_size]}
        return [ind for ind in ordered if ind.id in keep]

    if mech == "age":
        ranked = sorted(ordered, key=lambda ind: (ind.age, ind.id))
        keep = {ind.id for ind in ranked[: cfg.target_size]}
        return [ind for ind in ordered if ind.id in keep]

    if mech == "probabilistic_age":
        survivors = []
        for ind in ordered:
            p = min(ind.age / cfg.max_age, 1.0)
            if rng.random() >= p:
                survivors.append(ind)
        return survivors

    if mech == "energy":
        return [ind for ind in ordered if ind.energy > 0.0]

    if mech == "density":
        if densities is None:
            raise ValueError("density mechanism requires precomputed densities")
        by_id = {ind.id: rho for ind, rho in zip(pop, densities)}
        survivors = []
        for ind in ordered:
            p = density_death_prob(float(by_id[ind.id]), cfg)
            if rng.random() >= p:
                survivors.append(ind)
        return survivors

    if mech == "parents_die":
        parent_ids = parents.parent_ids() if parents is not None else set()
        return [ind for ind in ordered if ind.id not in parent_ids]

    raise ValueError(f"unknown death mechanism: {mech}")


def compute_densities(pop: list[Individual], cfg: DeathSelectionConfig,
                      world: WorldConfig) -> np.ndarray:
    """Local crowding for every individual, using the configured kernel width."""
    from .world import DensityKernelConfig

    positions = np.array([[ind.position.x, ind.position.y] for ind in pop]).reshape(len(pop), 2)
    return local_densities(positions, DensityKernelConfig(cfg.density_kernel_width), world)
