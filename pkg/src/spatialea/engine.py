"""Generational loop: evaluate, simulate, pair, reproduce, update, cull.

One logical owner advances a run. All randomness flows through the run's rng
in a fixed order (ascending id wherever a choice is per-individual), so a
(config, seed) pair replays bit-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .genome import Genome, InnovationRegistry, init_genome, reproduce
from .locomotion import evaluate_fitness, run_mating_sim
from .selection import (
    Individual,
    PairingResult,
    apply_death,
    compute_densities,
    select_parents,
    update_energy,
)
from .world import (
    MatingZone,
    Position,
    periodic_displacement,
    periodic_distance,
    pairwise_periodic_distances,
    random_zones,
    wrap_position,
    zone_membership,
)

if TYPE_CHECKING:
    from .harness import ExperimentConfig

RUNNING = "running"
COMPLETED = "completed"
EXTINCT = "extinct"
EXPLODED = "exploded"


@dataclass(frozen=True)
class EngineConfig:
    max_generations: int = 100
    initial_population: int = 30
    min_population: int = 1
    max_population: int = 100
    spawn_radius: float = 3.0
    incubation_generations: int = 0
    offspring_per_pair: int = 1

    def __post_init__(self):
        if self.max_generations < 1:
            raise ValueError("generation budget must be >= 1")
        if self.initial_population < 1:
            raise ValueError("initial population must be >= 1")
        if self.max_population <= self.initial_population:
            raise ValueError("population ceiling must exceed the initial size")
        if self.spawn_radius <= 0:
            raise ValueError("spawn radius must be positive")
        if self.incubation_generations < 0:
            raise ValueError("incubation generations must be >= 0")
        if self.offspring_per_pair < 1:
            raise ValueError("offspring per pair must be >= 1")


@dataclass(frozen=True)
class GenerationRecord:
    """Per-generation statistics; fitness stats cover the acting population."""

    generation: int
    population_size: int
    best_fitness: float | None
    mean_fitness: float | None
    median_fitness: float | None
    std_fitness: float | None
    mating_count: int
    mean_pair_distance: float | None
    spatial_dispersion: float | None
    mean_energy: float | None
    zone_occupancy: tuple[int, ...] | None


@dataclass(frozen=True)
class RunOutcome:
    status: str  # completed | extinct | exploded
    final_generation: int
    final_population: int
    best_fitness: float | None
    records: tuple[GenerationRecord, ...]


@dataclass
class GenerationArtifacts:
    """Raw per-generation material for the log files (not statistics)."""

    generation: int
    matings: list[tuple[int, int, float, int]]  # parent a, parent b, distance, zone (-1)
    trajectories: np.ndarray  # (agents, ticks, 2)
    agent_ids: list[int]
    acting_population: list[tuple[int, float | None, Genome]]
    zones: list[MatingZone]  # zone state the agents experienced this generation


@dataclass
class EngineState:
    population: list[Individual]
    zones: list[MatingZone]
    registry: InnovationRegistry
    generation: int = 0
    next_id: int = 0
    next_zone_assignment: int = 0
    best_fitness: float | None = None
    last_artifacts: GenerationArtifacts | None = field(default=None, repr=False)


def _spawn_fields(cfg: "ExperimentConfig", rng: np.random.Generator) -> tuple[Position, float]:
    """Uniform position and heading for a fresh spawn."""
    x = rng.uniform(0.0, cfg.world.width)
    y = rng.uniform(0.0, cfg.world.height)
    heading = rng.uniform(0.0, 2.0 * math.pi)
    return wrap_position(x, y, cfg.world), heading


def _assign_zone(state: EngineState, cfg: "ExperimentConfig") -> int | None:
    """Round-robin zone assignment by birth order, fixed for life."""
    if not cfg.parent_selection.uses_zones or not state.zones:
        return None
    idx = state.next_zone_assignment % len(state.zones)
    state.next_zone_assignment += 1
    return idx


def _evaluate(ind: Individual, cfg: "ExperimentConfig") -> float:
    if ind.fitness is None:
        ind.fitness = evaluate_fitness(ind.genome, cfg.fitness, cfg.kinematics,
                                       cfg.substrate, cfg.world)
    return ind.fitness


def _tournament(pop: list[Individual], rng: np.random.Generator, k: int = 3) -> Individual:
    picks = [pop[int(rng.integers(len(pop)))] for _ in range(k)]
    return min(picks, key=lambda ind: (-(ind.fitness or 0.0), ind.id))


def run_incubation(cfg: "ExperimentConfig", registry: InnovationRegistry,
                   rng: np.random.Generator) -> tuple[list[Individual], int]:
    """Panmictic warm-up EA (tournament k=3, elitism) seeding the spatial run.

    With zero incubation generations this is plain random initialization.
    Returns the seeded population (ids assigned, everything else reset for the
    spatial phase except cached fitness) and the next free id.
    """
    size = cfg.engine.initial_population
    next_id = 0
    population: list[Individual] = []
    for _ in range(size):
        genome = init_genome(rng, cfg.variation, registry)
        population.append(Individual(id=next_id, genome=genome,
                                     position=Position(0.0, 0.0),
                                     energy=cfg.death_selection.initial_energy))
        next_id += 1

    for _ in range(cfg.engine.incubation_generations):
        for ind in population:
            _evaluate(ind, cfg)
        elite = min(population, key=lambda ind: (-(ind.fitness or 0.0), ind.id))
        new_population = [elite]
        while len(new_population) < size:
            a = _tournament(population, rng)
            b = _tournament(population, rng)
            child_genome = reproduce(a.genome, b.genome, a.fitness or 0.0, b.fitness or 0.0,
                                     rng, cfg.variation, registry)
            new_population.append(Individual(id=next_id, genome=child_genome,
                                             position=Position(0.0, 0.0),
                                             energy=cfg.death_selection.initial_energy))
            next_id += 1
        population = new_population

    for ind in population:
        ind.position, ind.heading = _spawn_fields(cfg, rng)
        ind.age = 0
        ind.energy = cfg.death_selection.initial_energy
    return population, next_id


def init_state(cfg: "ExperimentConfig", rng: np.random.Generator) -> EngineState:
    """Seed a run: incubation (or plain init), zone placement, zone assignment."""
    registry = InnovationRegistry()
    population, next_id = run_incubation(cfg, registry, rng)
    zones: list[MatingZone] = []
    if cfg.parent_selection.uses_zones and cfg.parent_selection.zone_count > 0:
        zones = random_zones(cfg.parent_selection.zone_count,
                             cfg.parent_selection.zone_radius, rng, cfg.world)
    state = EngineState(population=population, zones=zones, registry=registry,
                        next_id=next_id)
    for ind in population:
        ind.assigned_zone = _assign_zone(state, cfg)
    return state


def _fitness_stats(values: list[float]) -> tuple[float | None, ...]:
    if not values:
        return (None, None, None, None)
    arr = np.array(values)
    return (float(arr.max()), float(arr.mean()), float(np.median(arr)), float(arr.std()))


def _spawn_offspring(pair: tuple[Individual, Individual], state: EngineState,
                     cfg: "ExperimentConfig", rng: np.random.Generator) -> Individual:
    a, b = pair
    child_genome = reproduce(a.genome, b.genome, a.fitness or 0.0, b.fitness or 0.0,
                             rng, cfg.variation, state.registry)
    dx, dy = periodic_displacement(a.position, b.position, cfg.world)
    mid = wrap_position(a.position.x + dx / 2.0, a.position.y + dy / 2.0, cfg.world)
    radius = cfg.engine.spawn_radius * math.sqrt(rng.random())
    angle = rng.uniform(0.0, 2.0 * math.pi)
    pos = wrap_position(mid.x + radius * math.cos(angle), mid.y + radius * math.sin(angle),
                        cfg.world)
    heading = rng.uniform(0.0, 2.0 * math.pi)
    child = Individual(id=state.next_id, genome=child_genome, position=pos, heading=heading,
                       age=0, energy=cfg.death_selection.initial_energy,
                       assigned_zone=_assign_zone(state, cfg))
    state.next_id += 1
    return child


def run_generation(state: EngineState, cfg: "ExperimentConfig",
                   rng: np.random.Generator) -> tuple[EngineState, GenerationRecord]:
    """Advance the run by one generation and collect its record.

    Order: isolated evaluation, shared-world mating simulation, parent
    selection, reproduction, energy update and zone relocation, death
    selection (newborns are exempt except under the truncation mechanisms,
    which rank the merged population), then age increments for survivors that
    predate this generation.
    """
    generation = state.generation + 1
    pop = sorted(state.population, key=lambda ind: ind.id)
    death_cfg = cfg.death_selection

    # 1. Isolated evaluation (cached: genomes never change after birth).
    for ind in pop:
        _evaluate(ind, cfg)
    stats = _fitness_stats([ind.fitness for ind in pop if ind.fitness is not None])
    if stats[0] is not None:
        state.best_fitness = stats[0] if state.best_fitness is None else max(state.best_fitness, stats[0])

    # 2. Shared-world mating simulation.
    sim = run_mating_sim(pop, state.zones, cfg.parent_selection.movement_bias,
                         cfg.kinematics, cfg.substrate, cfg.world)
    for ind, position, heading in zip(pop, sim.final_positions, sim.final_headings):
        ind.position = position
        ind.heading = heading

    # 3. Parent selection.
    pairing = select_parents(pop, cfg.parent_selection, state.zones, cfg.world, rng)
    parent_ids = pairing.parent_ids()
    matings = []
    for pair, zone in zip(pairing.pairs, pairing.pair_zones):
        d = periodic_distance(pair[0].position, pair[1].position, cfg.world)
        matings.append((pair[0].id, pair[1].id, d, zone if zone is not None else -1))

    zone_occupancy: tuple[int, ...] | None = None
    if state.zones:
        counts = [0] * len(state.zones)
        for ind in pop:
            k = zone_membership(ind.position, state.zones, cfg.world)
            if k is not None:
                counts[k] += 1
        zone_occupancy = tuple(counts)

    # 4. Reproduction.
    offspring: list[Individual] = []
    for pair in pairing.pairs:
        for _ in range(cfg.engine.offspring_per_pair):
            offspring.append(_spawn_offspring(pair, state, cfg, rng))

    # 5. Energy update (pre-existing only), then zone relocation.
    if death_cfg.mechanism == "energy":
        for ind in pop:
            update_energy(ind, ind.id in parent_ids, death_cfg)
    zones_used = list(state.zones)
    if state.zones:
        state.zones = relocation_from(state.zones, cfg, pairing, generation, rng)

    # 6. Death selection; truncation mechanisms rank the merged population.
    if death_cfg.mechanism in ("fitness", "age"):
        merged = pop + offspring
        if death_cfg.mechanism == "fitness":
            for ind in merged:
                _evaluate(ind, cfg)
        survivors = apply_death(merged, death_cfg, pairing, None, rng)
    elif death_cfg.mechanism == "density":
        densities = compute_densities(pop, death_cfg, cfg.world)
        survivors = apply_death(pop, death_cfg, pairing, densities, rng) + offspring
    else:
        survivors = apply_death(pop, death_cfg, pairing, None, rng) + offspring

    offspring_ids = {ind.id for ind in offspring}
    for ind in survivors:
        if ind.id not in offspring_ids:
            ind.age += 1
    survivors.sort(key=lambda ind: ind.id)

    dispersion = None
    if len(pop) >= 2:
        positions = np.array([[i.position.x, i.position.y] for i in pop])
        d = pairwise_periodic_distances(positions, cfg.world)
        dispersion = float(d[np.triu_indices(len(pop), k=1)].mean())

    mean_energy = None
    if death_cfg.mechanism == "energy" and survivors:
        mean_energy = float(np.mean([ind.energy for ind in survivors]))

    record = GenerationRecord(
        generation=generation,
        population_size=len(survivors),
        best_fitness=stats[0],
        mean_fitness=stats[1],
        median_fitness=stats[2],
        std_fitness=stats[3],
        mating_count=len(pairing.pairs),
        mean_pair_distance=(float(np.mean([m[2] for m in matings])) if matings else None),
        spatial_dispersion=dispersion,
        mean_energy=mean_energy,
        zone_occupancy=zone_occupancy,
    )
    state.last_artifacts = GenerationArtifacts(
        generation=generation,
        matings=matings,
        trajectories=sim.trajectories,
        agent_ids=[ind.id for ind in pop],
        acting_population=[(ind.id, ind.fitness, ind.genome) for ind in pop],
        zones=zones_used,
    )
    state.population = survivors
    state.generation = generation
    return state, record


def relocation_from(zones: list[MatingZone], cfg: "ExperimentConfig",
                    pairing: PairingResult, generation: int,
                    rng: np.random.Generator) -> list[MatingZone]:
    from .selection import relocation_policy

    return relocation_policy(zones, cfg.parent_selection.relocation,
                             cfg.parent_selection.relocation_interval,
                             pairing.mated_zones, generation, rng, cfg.world)


def check_termination(state: EngineState, cfg: EngineConfig) -> str:
    """Extinction and explosion take precedence over the generation budget."""
    size = len(state.population)
    if size < cfg.min_population:
        return EXTINCT
    if size >= cfg.max_population:
        return EXPLODED
    if state.generation >= cfg.max_generations:
        return COMPLETED
    return RUNNING
