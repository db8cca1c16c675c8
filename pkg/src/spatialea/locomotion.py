"""Surrogate kinematics: controller outputs become 2D motion.

A differential-drive stand-in for articulated physics. Joints chase their
targets under a rate limit; how much they move sets forward speed, and the
imbalance between the two joint halves steers. This keeps the essential
coupling: how far an agent gets is a nontrivial function of its genome, and
directional inputs make taxis evolvable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controller import (
    JOINT_LIMIT,
    SubstrateConfig,
    SubstrateNetwork,
    assemble_inputs,
    build_substrate,
    forward,
)
from .genome import Genome
from .selection import Individual, bias_vectors
from .world import Position, WorldConfig, wrap_position


@dataclass(frozen=True)
class KinematicsConfig:
    dt: float = 0.02  # control timestep, seconds
    max_joint_speed: float = 4.0  # rad/s
    forward_gain: float = 0.5  # meters per radian of mean joint motion
    turn_gain: float = 0.5  # heading radians per radian of joint asymmetry
    evaluation_duration: float = 60.0  # isolated fitness window, seconds
    mating_duration: float = 60.0  # shared-world window, seconds

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("timestep must be positive")
        if self.max_joint_speed <= 0 or self.forward_gain <= 0 or self.turn_gain <= 0:
            raise ValueError("rate limit and gains must be positive")
        if self.evaluation_duration <= 0 or self.mating_duration <= 0:
            raise ValueError("durations must be positive")

    def ticks(self, duration: float) -> int:
        return int(round(duration / self.dt))


@dataclass(frozen=True)
class FitnessConfig:
    mode: str = "simple"  # "simple" | "directional"
    progress_weight: float = 0.5
    target_direction: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        if self.mode not in ("simple", "directional"):
            raise ValueError(f"unknown fitness mode: {self.mode}")
        if self.progress_weight < 0:
            raise ValueError("progress weight must be >= 0")
        if self.mode == "directional":
            norm = math.hypot(*self.target_direction)
            if abs(norm - 1.0) > 1e-9:
                raise ValueError("target direction must be a unit vector")


@dataclass(frozen=True)
class AgentState:
    position: Position
    heading: float
    joint_angles: np.ndarray  # shape (n,), each within the joint limits
    t: float = 0.0


def _step_arrays(joints: np.ndarray, heading: float, xy: np.ndarray,
                 targets: np.ndarray, cfg: KinematicsConfig,
                 world: WorldConfig) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """One tick of the drive model. Returns (joints', heading', xy', step vector)."""
    limit = cfg.max_joint_speed * cfg.dt
    delta = np.clip(targets - joints, -limit, limit)
    new_joints = joints + delta
    half = len(joints) // 2
    distance = cfg.forward_gain * float(np.mean(np.abs(delta)))
    turn_rate = cfg.turn_gain * (float(np.mean(delta[:half])) - float(np.mean(delta[half:]))) / cfg.dt
    new_heading = heading + turn_rate * cfg.dt
    step = np.array([distance * math.cos(new_heading), distance * math.sin(new_heading)])
    raw = xy + step
    wrapped = wrap_position(float(raw[0]), float(raw[1]), world)
    return new_joints, new_heading, np.array([wrapped.x, wrapped.y]), step


def step_agent(state: AgentState, targets: np.ndarray, cfg: KinematicsConfig,
               world: WorldConfig) -> AgentState:
    """Advance a single agent by one control tick."""
    xy = np.array([state.position.x, state.position.y])
    joints, heading, new_xy, _ = _step_arrays(state.joint_angles, state.heading, xy,
                                              targets, cfg, world)
    return AgentState(
        position=Position(float(new_xy[0]), float(new_xy[1])),
        heading=heading,
        joint_angles=joints,
        t=state.t + cfg.dt,
    )


def network_for(individual: Individual, scfg: SubstrateConfig) -> SubstrateNetwork:
    """Build (and cache) the individual's substrate network."""
    if individual.network is None:
        individual.network = build_substrate(individual.genome, scfg)
    return individual.network


@dataclass(frozen=True)
class SingleRun:
    """Outcome of simulating one agent for a fixed window."""

    trajectory: np.ndarray  # (ticks, 2) wrapped positions, one row per tick
    net_displacement: np.ndarray  # unwrapped end minus start
    path_length: float


def simulate_single(net: SubstrateNetwork, duration: float, kcfg: KinematicsConfig,
                    scfg: SubstrateConfig, world: WorldConfig,
                    start: tuple[float, float] = (0.0, 0.0), heading: float = 0.0,
                    direction: tuple[float, float] = (0.0, 0.0)) -> SingleRun:
    """Run one agent with a fixed directional input from zeroed joints."""
    n_ticks = kcfg.ticks(duration)
    joints = np.zeros(scfg.joints)
    xy = np.array(start, dtype=float)
    net_disp = np.zeros(2)
    path = 0.0
    trajectory = np.empty((n_ticks, 2))
    for tick in range(n_ticks):
        inputs = assemble_inputs(joints, tick * kcfg.dt, direction, scfg)
        targets = forward(net, inputs)
        joints, heading, xy, step = _step_arrays(joints, heading, xy, targets, kcfg, world)
        net_disp += step
        path += float(np.hypot(step[0], step[1]))
        trajectory[tick] = xy
    return SingleRun(trajectory=trajectory, net_displacement=net_disp, path_length=path)


def fitness_from_motion(net_displacement: np.ndarray, path_length: float,
                        fcfg: FitnessConfig) -> float:
    """Score a finished run.

    simple: magnitude of the unwrapped net displacement. directional: path
    length scaled by 1 + w * b, where b is the positive part of the cosine
    between the net displacement and the target direction (zero for a run
    that went nowhere).
    """
    v = net_displacement
    norm = float(np.hypot(v[0], v[1]))
    if fcfg.mode == "simple":
        return norm
    if norm == 0.0:
        progress = 0.0
    else:
        u = fcfg.target_direction
        progress = max(0.0, (float(v[0]) * u[0] + float(v[1]) * u[1]) / norm)
    return path_length * (1.0 + fcfg.progress_weight * progress)


def evaluate_fitness(genome: Genome, fcfg: FitnessConfig, kcfg: KinematicsConfig,
                     scfg: SubstrateConfig, world: WorldConfig) -> float:
    """Isolated locomotion score over the evaluation window."""
    net = build_substrate(genome, scfg)
    run = simulate_single(net, kcfg.evaluation_duration, kcfg, scfg, world)
    return fitness_from_motion(run.net_displacement, run.path_length, fcfg)


@dataclass(frozen=True)
class MatingSimResult:
    trajectories: np.ndarray  # (agents, ticks, 2) wrapped positions
    final_positions: list[Position]
    final_headings: list[float]


def run_mating_sim(population: list[Individual], zones: list, bias_mode: str,
                   kcfg: KinematicsConfig, scfg: SubstrateConfig, world: WorldConfig,
                   rng: np.random.Generator | None = None) -> MatingSimResult:
    """Advance all agents in lockstep for the shared-world mating window.

    Each tick every agent's directional input is recomputed from the previous
    tick's positions, then all agents step. There is no contact model, so
    per-tick updates are independent given the shared snapshot. The rng
    parameter is reserved; the dynamics themselves are deterministic.
    """
    n_agents = len(population)
    n_ticks = kcfg.ticks(kcfg.mating_duration)
    if n_agents == 0:
        return MatingSimResult(np.empty((0, n_ticks, 2)), [], [])

    nets = [network_for(ind, scfg) for ind in population]
    joints = np.zeros((n_agents, scfg.joints))
    headings = np.array([ind.heading for ind in population], dtype=float)
    positions = np.array([[ind.position.x, ind.position.y] for ind in population], dtype=float)
    zone_centers = (
        np.array([[z.center.x, z.center.y] for z in zones]) if zones else None
    )
    assigned = np.array(
        [ind.assigned_zone if ind.assigned_zone is not None else -1 for ind in population]
    )
    trajectories = np.empty((n_agents, n_ticks, 2))

    for tick in range(n_ticks):
        t = tick * kcfg.dt
        dirs = bias_vectors(positions, bias_mode, zone_centers, assigned, world)
        for p in range(n_agents):
            inputs = assemble_inputs(joints[p], t, (float(dirs[p, 0]), float(dirs[p, 1])), scfg)
            targets = forward(nets[p], inputs)
            joints[p], headings[p], positions[p], _ = _step_arrays(
                joints[p], headings[p], positions[p], targets, kcfg, world
            )
        trajectories[:, tick, :] = positions

    final_positions = [Position(float(x), float(y)) for x, y in positions]
    return MatingSimResult(trajectories, final_positions, [float(h) for h in headings])
