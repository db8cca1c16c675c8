import math

import numpy as np
import pytest

from spatialea.controller import SubstrateConfig, SubstrateNetwork
from spatialea.genome import InnovationRegistry, VariationRates, init_genome
from spatialea.locomotion import (
    AgentState,
    FitnessConfig,
    KinematicsConfig,
    evaluate_fitness,
    fitness_from_motion,
    network_for,
    run_mating_sim,
    simulate_single,
    step_agent,
)
from spatialea.selection import Individual
from spatialea.world import Position, WorldConfig

WORLD = WorldConfig()
SCFG = SubstrateConfig()
KCFG = KinematicsConfig()


def zero_network() -> SubstrateNetwork:
    return SubstrateNetwork(np.zeros((15, 8)), np.zeros((8, 8)))


def rest_state(x=5.0, y=5.0, heading=0.0) -> AgentState:
    return AgentState(Position(x, y), heading, np.zeros(8), 0.0)


class TestStepAgent:
    def test_targets_at_current_angles_is_a_fixed_point(self):
        state = rest_state(heading=0.4)
        after = step_agent(state, np.zeros(8), KCFG, WORLD)
        assert (after.position.x, after.position.y) == (5.0, 5.0)
        assert after.heading == 0.4
        assert np.all(after.joint_angles == 0.0)
        assert after.t == pytest.approx(KCFG.dt)

    def test_symmetric_motion_goes_straight(self):
        state = rest_state(heading=0.0)
        targets = np.full(8, 0.5)  # both halves move identically
        after = step_agent(state, targets, KCFG, WORLD)
        assert after.heading == 0.0
        assert after.position.y == pytest.approx(5.0)
        assert after.position.x > 5.0

    def test_saturated_joints_move_the_speed_cap(self):
        # Every joint rate-limited: displacement = forward_gain * max_speed * dt.
        state = rest_state()
        targets = np.full(8, 10.0)
        after = step_agent(state, targets, KCFG, WORLD)
        moved = math.hypot(after.position.x - 5.0, after.position.y - 5.0)
        assert moved == pytest.approx(KCFG.forward_gain * KCFG.max_joint_speed * KCFG.dt)

    def test_per_tick_displacement_bounded(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            state = rest_state(heading=float(rng.uniform(0, 2 * math.pi)))
            state = AgentState(state.position, state.heading,
                               rng.uniform(-1.5, 1.5, 8), 0.0)
            targets = rng.uniform(-math.pi / 2, math.pi / 2, 8)
            after = step_agent(state, targets, KCFG, WORLD)
            moved = math.hypot(after.position.x - 5.0, after.position.y - 5.0)
            assert moved <= KCFG.forward_gain * KCFG.max_joint_speed * KCFG.dt + 1e-12


class TestFitness:
    def test_zero_network_scores_zero_in_both_modes(self):
        kcfg = KinematicsConfig(evaluation_duration=1.0)
        genome = _still_genome()
        assert evaluate_fitness(genome, FitnessConfig(mode="simple"), kcfg, SCFG, WORLD) == 0.0
        assert evaluate_fitness(genome, FitnessConfig(mode="directional"), kcfg, SCFG, WORLD) == 0.0

    def test_directional_bonus_for_on_target_motion(self):
        fcfg = FitnessConfig(mode="directional", progress_weight=0.5,
                             target_direction=(1.0, 0.0))
        # Straight run: net displacement 5 along the target, path length 5.
        assert fitness_from_motion(np.array([5.0, 0.0]), 5.0, fcfg) == pytest.approx(7.5)

    def test_perpendicular_motion_gets_no_bonus(self):
        fcfg = FitnessConfig(mode="directional", progress_weight=0.5,
                             target_direction=(1.0, 0.0))
        assert fitness_from_motion(np.array([0.0, 4.0]), 6.0, fcfg) == pytest.approx(6.0)

    def test_directional_bounds(self):
        fcfg = FitnessConfig(mode="directional", progress_weight=0.5,
                             target_direction=(1.0, 0.0))
        rng = np.random.default_rng(8)
        for _ in range(100):
            v = rng.normal(0, 3, 2)
            d_total = float(np.linalg.norm(v)) + float(rng.uniform(0, 5))
            f = fitness_from_motion(v, d_total, fcfg)
            assert d_total <= f <= d_total * 1.5 + 1e-12

    def test_simple_mode_accumulates_unwrapped_displacement(self):
        # A fast straight mover must not score zero by lapping the torus:
        # hidden units track an oscillator, so the joints never stop swinging.
        input_hidden = np.zeros((15, 8))
        input_hidden[8, :] = 5.0  # the sin(2*pi*f*t) input
        net = SubstrateNetwork(input_hidden, 5.0 * np.eye(8))
        run = simulate_single(net, 60.0, KCFG, SCFG, WORLD)
        assert float(np.hypot(*run.net_displacement)) > WORLD.width


def _still_genome():
    from spatialea.genome import ConnectionGene, Genome, INPUT_IDS, NodeGene, OUTPUT_ID

    nodes = tuple(NodeGene(i, "identity", "input") for i in INPUT_IDS) + (
        NodeGene(OUTPUT_ID, "identity", "output"),
    )
    return Genome(nodes=nodes, connections=(ConnectionGene(0, OUTPUT_ID, 0.0, True, 0),))


def _population(count: int, seed: int) -> list[Individual]:
    rng = np.random.default_rng(seed)
    registry = InnovationRegistry()
    pop = []
    for i in range(count):
        genome = init_genome(rng, VariationRates(), registry)
        pos = Position(float(rng.uniform(0, 25)), float(rng.uniform(0, 25)))
        pop.append(Individual(id=i, genome=genome, position=pos,
                              heading=float(rng.uniform(0, 2 * math.pi))))
    return pop


class TestMatingSim:
    def test_single_agent_matches_isolated_run(self):
        genome = init_genome(np.random.default_rng(31), VariationRates(), InnovationRegistry())
        ind = Individual(id=0, genome=genome, position=Position(12.5, 12.5), heading=0.0)
        kcfg = KinematicsConfig(evaluation_duration=3.0, mating_duration=3.0)
        sim = run_mating_sim([ind], [], "none", kcfg, SCFG, WORLD)
        isolated = simulate_single(network_for(ind, SCFG), 3.0, kcfg, SCFG, WORLD,
                                   start=(12.5, 12.5), heading=0.0)
        assert np.array_equal(sim.trajectories[0], isolated.trajectory)

    def test_tick_count_for_sixty_second_window(self):
        kcfg = KinematicsConfig(mating_duration=60.0, dt=0.02)
        pop = _population(2, seed=5)
        sim = run_mating_sim(pop, [], "none", kcfg, SCFG, WORLD)
        assert sim.trajectories.shape == (2, 3000, 2)

    def test_deterministic(self):
        kcfg = KinematicsConfig(mating_duration=2.0)
        a = run_mating_sim(_population(4, seed=9), [], "nearest_neighbor", kcfg, SCFG, WORLD)
        b = run_mating_sim(_population(4, seed=9), [], "nearest_neighbor", kcfg, SCFG, WORLD)
        assert np.array_equal(a.trajectories, b.trajectories)

    def test_empty_population(self):
        sim = run_mating_sim([], [], "none", KinematicsConfig(mating_duration=1.0), SCFG, WORLD)
        assert sim.trajectories.shape[0] == 0
        assert sim.final_positions == []

    def test_positions_stay_wrapped(self):
        kcfg = KinematicsConfig(mating_duration=2.0)
        sim = run_mating_sim(_population(5, seed=2), [], "nearest_neighbor", kcfg, SCFG, WORLD)
        assert np.all(sim.trajectories >= 0.0)
        assert np.all(sim.trajectories[..., 0] < WORLD.width)
        assert np.all(sim.trajectories[..., 1] < WORLD.height)
