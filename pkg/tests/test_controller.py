import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spatialea.controller import (
    JOINT_LIMIT,
    SubstrateConfig,
    SubstrateNetwork,
    assemble_inputs,
    build_substrate,
    forward,
)
from spatialea.genome import (
    INPUT_IDS,
    OUTPUT_ID,
    ConnectionGene,
    Genome,
    InnovationRegistry,
    NodeGene,
    VariationRates,
    init_genome,
)


def constant_cppn(value: float) -> Genome:
    """CPPN that outputs `value` for every coordinate quadruple.

    A gaussian hidden node with no inputs fires at 1.0; a single weighted
    connection carries it to the identity output.
    """
    nodes = tuple(NodeGene(i, "identity", "input") for i in INPUT_IDS) + (
        NodeGene(OUTPUT_ID, "identity", "output"),
        NodeGene(5, "gaussian", "hidden"),
    )
    return Genome(nodes=nodes, connections=(ConnectionGene(5, OUTPUT_ID, value, True, 0),))


class TestBuildSubstrate:
    def test_shapes_for_eight_joints(self):
        net = build_substrate(constant_cppn(1.0), SubstrateConfig(joints=8))
        assert net.input_hidden.shape == (15, 8)
        assert net.hidden_output.shape == (8, 8)

    def test_subthreshold_weights_prune_to_zero(self):
        net = build_substrate(constant_cppn(0.1), SubstrateConfig(prune_threshold=0.2))
        assert np.all(net.input_hidden == 0.0)
        assert np.all(net.hidden_output == 0.0)

    def test_above_threshold_weights_survive(self):
        net = build_substrate(constant_cppn(1.0), SubstrateConfig(prune_threshold=0.2))
        assert np.all(net.input_hidden == 1.0)
        assert np.all(net.hidden_output == 1.0)

    def test_pure_function_of_genome_and_config(self):
        genome = init_genome(np.random.default_rng(5), VariationRates(), InnovationRegistry())
        cfg = SubstrateConfig()
        a = build_substrate(genome, cfg)
        b = build_substrate(genome, cfg)
        assert np.array_equal(a.input_hidden, b.input_hidden)
        assert np.array_equal(a.hidden_output, b.hidden_output)

    def test_sparsity_monotone_in_threshold(self):
        genome = init_genome(np.random.default_rng(17), VariationRates(), InnovationRegistry())
        counts = [
            build_substrate(genome, SubstrateConfig(prune_threshold=tau)).nonzero_count()
            for tau in (0.0, 0.1, 0.2, 0.5, 1.0, 3.0)
        ]
        assert counts == sorted(counts, reverse=True)


class TestAssembleInputs:
    CFG = SubstrateConfig(joints=8, cpg_frequency=1.0)

    def test_rest_state_vector(self):
        vec = assemble_inputs(np.zeros(8), 0.0, (0.0, 0.0), self.CFG)
        assert np.allclose(vec, [0] * 8 + [0.0, 1.0, 0.0, 1.0] + [0.0, 0.0] + [1.0])

    def test_no_bias_leaves_direction_zero(self):
        vec = assemble_inputs(np.full(8, 0.3), 1.7, (0.0, 0.0), self.CFG)
        assert vec[12] == 0.0 and vec[13] == 0.0

    def test_length_is_joints_plus_seven(self):
        assert len(assemble_inputs(np.zeros(8), 2.0, (1.0, 0.0), self.CFG)) == 15

    def test_oscillator_frequencies(self):
        t = 0.37
        vec = assemble_inputs(np.zeros(8), t, (0.0, 0.0), self.CFG)
        assert vec[8] == pytest.approx(math.sin(2 * math.pi * t))
        assert vec[10] == pytest.approx(math.sin(4 * math.pi * t))


class TestForward:
    def test_zero_network_outputs_zeros(self):
        net = SubstrateNetwork(np.zeros((15, 8)), np.zeros((8, 8)))
        assert np.all(forward(net, np.ones(15)) == 0.0)

    def test_large_raw_output_clips_to_joint_limit(self):
        net = SubstrateNetwork(np.full((15, 8), 5.0), np.full((8, 8), 5.0))
        out = forward(net, np.ones(15))
        assert np.allclose(out, JOINT_LIMIT)

    @given(st.integers(0, 2**32 - 1))
    def test_output_always_within_limits(self, seed):
        rng = np.random.default_rng(seed)
        net = SubstrateNetwork(rng.normal(0, 3, (15, 8)), rng.normal(0, 3, (8, 8)))
        out = forward(net, rng.normal(0, 10, 15))
        assert np.all(np.abs(out) <= JOINT_LIMIT)
        assert np.linalg.norm(out) <= JOINT_LIMIT * math.sqrt(8) + 1e-12


class TestSubstrateConfig:
    def test_default_layout_sizes(self):
        inputs, hidden, outputs = SubstrateConfig(joints=8).layer_coordinates()
        assert (len(inputs), len(hidden), len(outputs)) == (15, 8, 8)
        assert all(y == -1.0 for _, y in inputs)
        assert all(y == 0.0 for _, y in hidden)
        assert all(y == 1.0 for _, y in outputs)

    def test_coordinates_span_unit_range(self):
        inputs, _, _ = SubstrateConfig().layer_coordinates()
        xs = [x for x, _ in inputs]
        assert min(xs) == -1.0 and max(xs) == 1.0

    def test_rejects_odd_joint_count(self):
        with pytest.raises(ValueError):
            SubstrateConfig(joints=7)
