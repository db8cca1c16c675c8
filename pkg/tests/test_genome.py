import numpy as np
import pytest

from spatialea.genome import (
    ACTIVATIONS,
    INPUT_IDS,
    OUTPUT_ID,
    ConnectionGene,
    Genome,
    InnovationRegistry,
    NodeGene,
    VariationRates,
    crossover,
    genome_from_text,
    genome_to_text,
    init_genome,
    is_acyclic,
    mutate,
    query_cppn,
    reproduce,
)

ZERO_RATES = VariationRates(weight_mutation_prob=0.0, add_connection_prob=0.0,
                            add_node_prob=0.0, crossover_prob=0.0)


def io_nodes():
    return tuple(NodeGene(i, "identity", "input") for i in INPUT_IDS) + (
        NodeGene(OUTPUT_ID, "identity", "output"),
    )


def passthrough_genome(weight: float = 1.0, enabled: bool = True) -> Genome:
    """Single connection x1 -> output."""
    return Genome(nodes=io_nodes(),
                  connections=(ConnectionGene(0, OUTPUT_ID, weight, enabled, 0),))


def assert_valid(genome: Genome):
    assert is_acyclic(genome)
    innovations = [c.innovation for c in genome.connections]
    assert len(innovations) == len(set(innovations))
    node_ids = [n.id for n in genome.nodes]
    assert len(node_ids) == len(set(node_ids))
    enabled_edges = [(c.source, c.target) for c in genome.connections if c.enabled]
    assert len(enabled_edges) == len(set(enabled_edges))
    inputs = {n.id for n in genome.nodes if n.layer == "input"}
    assert all(c.target not in inputs for c in genome.connections)


class TestInitGenome:
    def test_structure(self):
        genome = init_genome(np.random.default_rng(1), VariationRates(), InnovationRegistry())
        assert_valid(genome)
        assert {n.id for n in genome.nodes} >= set(INPUT_IDS) | {OUTPUT_ID}
        input_to_output = [c for c in genome.connections if c.source in INPUT_IDS]
        assert len(input_to_output) >= 4

    def test_deterministic(self):
        a = init_genome(np.random.default_rng(9), VariationRates(), InnovationRegistry())
        b = init_genome(np.random.default_rng(9), VariationRates(), InnovationRegistry())
        assert a == b

    def test_hidden_node_fraction_is_about_half(self):
        rng = np.random.default_rng(2024)
        registry = InnovationRegistry()
        rates = VariationRates()
        with_hidden = sum(
            any(n.layer == "hidden" for n in init_genome(rng, rates, registry).nodes)
            for _ in range(10_000)
        )
        assert with_hidden / 10_000 == pytest.approx(0.5, abs=0.02)


class TestQueryCppn:
    def test_zero_weight_network_outputs_zero(self):
        genome = passthrough_genome(weight=0.0)
        for probe in [(-1, -1, -1, -1), (0.3, -0.7, 0.9, 0.1), (1, 1, 1, 1)]:
            assert query_cppn(genome, *probe) == 0.0

    def test_passthrough_returns_first_coordinate(self):
        genome = passthrough_genome(weight=1.0)
        assert query_cppn(genome, 0.25, -0.9, 0.4, 1.0) == 0.25
        assert query_cppn(genome, -1.0, 0.0, 0.0, 0.0) == -1.0

    def test_disconnected_output_is_constant(self):
        genome = passthrough_genome(weight=1.0, enabled=False)
        rng = np.random.default_rng(5)
        values = {query_cppn(genome, *rng.uniform(-1, 1, size=4)) for _ in range(100)}
        assert values == {0.0}

    def test_deterministic(self):
        genome = init_genome(np.random.default_rng(3), VariationRates(), InnovationRegistry())
        probe = (0.1, -0.2, 0.3, -0.4)
        assert query_cppn(genome, *probe) == query_cppn(genome, *probe)


class TestMutate:
    def test_zero_rates_is_identity(self):
        registry = InnovationRegistry()
        genome = init_genome(np.random.default_rng(0), VariationRates(), registry)
        assert mutate(genome, np.random.default_rng(1), ZERO_RATES, registry) == genome

    def test_add_node_splits_a_connection(self):
        registry = InnovationRegistry()
        registry.connection_innovation(0, OUTPUT_ID)
        genome = passthrough_genome(weight=0.7)
        rates = VariationRates(weight_mutation_prob=0.0, add_connection_prob=0.0,
                               add_node_prob=1.0)
        child = mutate(genome, np.random.default_rng(4), rates, registry)
        assert len(child.connections) == 3
        assert sum(not c.enabled for c in child.connections) == 1
        disabled = next(c for c in child.connections if not c.enabled)
        assert (disabled.source, disabled.target) == (0, OUTPUT_ID)
        into = next(c for c in child.connections if c.enabled and c.source == 0)
        out = next(c for c in child.connections if c.enabled and c.target == OUTPUT_ID)
        assert into.weight == 1.0
        assert out.weight == 0.7
        assert_valid(child)

    def test_add_connection_skips_when_saturated(self):
        # Inputs->output fully wired and no hidden nodes: no legal site left.
        registry = InnovationRegistry()
        connections = tuple(
            ConnectionGene(i, OUTPUT_ID, 1.0, True, registry.connection_innovation(i, OUTPUT_ID))
            for i in INPUT_IDS
        )
        genome = Genome(nodes=io_nodes(), connections=connections)
        rates = VariationRates(weight_mutation_prob=0.0, add_connection_prob=1.0,
                               add_node_prob=0.0)
        assert mutate(genome, np.random.default_rng(0), rates, registry) == genome

    def test_add_node_rate_monte_carlo(self):
        registry = InnovationRegistry()
        registry.connection_innovation(0, OUTPUT_ID)
        genome = passthrough_genome()
        rng = np.random.default_rng(77)
        rates = VariationRates()
        hits = sum(
            len(mutate(genome, rng, rates, registry).nodes) > len(genome.nodes)
            for _ in range(10_000)
        )
        assert hits / 10_000 == pytest.approx(0.03, abs=0.005)


class TestCrossover:
    def test_identical_parents_reproduce_structure(self):
        genome = init_genome(np.random.default_rng(12), VariationRates(), InnovationRegistry())
        enabled_only = Genome(nodes=genome.nodes,
                              connections=tuple(c for c in genome.connections if c.enabled))
        child = crossover(enabled_only, enabled_only, 1.0, 1.0, np.random.default_rng(0))
        assert child == enabled_only

    def test_disjoint_genes_come_from_fitter_parent(self):
        a = Genome(nodes=io_nodes(), connections=(
            ConnectionGene(0, OUTPUT_ID, 0.1, True, 1),
            ConnectionGene(1, OUTPUT_ID, 0.2, True, 2),
            ConnectionGene(2, OUTPUT_ID, 0.3, True, 3),
        ))
        b = Genome(nodes=io_nodes(), connections=(
            ConnectionGene(0, OUTPUT_ID, -0.1, True, 1),
            ConnectionGene(1, OUTPUT_ID, -0.2, True, 2),
            ConnectionGene(3, OUTPUT_ID, -0.4, True, 4),
        ))
        child = crossover(a, b, fitness_a=2.0, fitness_b=1.0, rng=np.random.default_rng(6))
        assert child.innovations() == {1, 2, 3}

    def test_tie_inherits_from_first_parent(self):
        a = Genome(nodes=io_nodes(), connections=(ConnectionGene(0, OUTPUT_ID, 0.1, True, 1),
                                                   ConnectionGene(1, OUTPUT_ID, 0.2, True, 2)))
        b = Genome(nodes=io_nodes(), connections=(ConnectionGene(0, OUTPUT_ID, -0.1, True, 1),
                                                   ConnectionGene(2, OUTPUT_ID, -0.3, True, 3)))
        child = crossover(a, b, fitness_a=1.0, fitness_b=1.0, rng=np.random.default_rng(8))
        assert child.innovations() == {1, 2}

    def test_closure_over_random_pairs(self):
        rng = np.random.default_rng(13)
        registry = InnovationRegistry()
        rates = VariationRates()
        for _ in range(50):
            a = init_genome(rng, rates, registry)
            b = init_genome(rng, rates, registry)
            for _ in range(3):
                a = mutate(a, rng, rates, registry)
                b = mutate(b, rng, rates, registry)
            child = crossover(a, b, float(rng.random()), float(rng.random()), rng)
            assert child.innovations() <= a.innovations() | b.innovations()
            assert_valid(child)


class TestReproduce:
    def test_forced_clone_is_exact(self):
        registry = InnovationRegistry()
        a = init_genome(np.random.default_rng(1), VariationRates(), registry)
        b = init_genome(np.random.default_rng(2), VariationRates(), registry)
        child = reproduce(a, b, 1.0, 0.5, np.random.default_rng(3), ZERO_RATES, registry)
        assert child == a

    def test_clone_branch_frequency(self):
        registry = InnovationRegistry()
        rates = VariationRates(weight_mutation_prob=0.0, add_connection_prob=0.0,
                               add_node_prob=0.0, crossover_prob=0.9)
        a = passthrough_genome(weight=1.0)
        b = Genome(nodes=io_nodes(),
                   connections=(ConnectionGene(1, OUTPUT_ID, 2.0, True, 1),))
        rng = np.random.default_rng(55)
        clones = sum(
            reproduce(a, b, 0.5, 1.0, rng, rates, registry) == a for _ in range(10_000)
        )
        # With b fitter, crossover keeps b's disjoint gene, so it never equals a.
        assert clones / 10_000 == pytest.approx(0.1, abs=0.01)

    def test_invariants_hold_under_fuzz(self):
        rng = np.random.default_rng(99)
        registry = InnovationRegistry()
        rates = VariationRates()
        pool = [init_genome(rng, rates, registry) for _ in range(20)]
        for _ in range(300):
            i, j = rng.integers(len(pool), size=2)
            child = reproduce(pool[i], pool[j], float(rng.random()), float(rng.random()),
                              rng, rates, registry)
            assert_valid(child)
            pool[int(rng.integers(len(pool)))] = child


class TestInnovationRegistry:
    def test_same_structural_change_same_number(self):
        registry = InnovationRegistry()
        first = registry.connection_innovation(2, OUTPUT_ID)
        other = registry.connection_innovation(1, OUTPUT_ID)
        assert registry.connection_innovation(2, OUTPUT_ID) == first
        assert other != first

    def test_registry_alignment_across_genomes(self):
        registry = InnovationRegistry()
        rates = VariationRates(weight_mutation_prob=0.0, add_connection_prob=1.0,
                               add_node_prob=0.0)
        genome = passthrough_genome()
        seen: dict[tuple[int, int], int] = {}
        for seed in range(20):
            child = mutate(genome, np.random.default_rng(seed), rates, registry)
            added = [c for c in child.connections if c.innovation != 0]
            for c in added:
                key = (c.source, c.target)
                if key in seen:
                    assert seen[key] == c.innovation
                seen[key] = c.innovation

    def test_split_node_ids_align_but_never_collide(self):
        registry = InnovationRegistry()
        taken: set[int] = set()
        first = registry.split_node_id(0, OUTPUT_ID, taken)
        again = registry.split_node_id(0, OUTPUT_ID, set())
        assert again == first
        fresh = registry.split_node_id(0, OUTPUT_ID, {first})
        assert fresh != first


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(21)
        registry = InnovationRegistry()
        rates = VariationRates()
        genome = init_genome(rng, rates, registry)
        for _ in range(5):
            genome = mutate(genome, rng, rates, registry)
        assert genome_from_text(genome_to_text(genome)) == genome

    def test_record_shape(self):
        text = genome_to_text(passthrough_genome(weight=-1.5))
        lines = text.splitlines()
        assert lines[0] == "nodes 5"
        assert lines[6] == "connections 1"

    def test_connection_line_fields(self):
        text = genome_to_text(passthrough_genome(weight=-1.5))
        line = text.splitlines()[-1]
        source, target, weight, enabled, innovation = line.split()
        assert (int(source), int(target)) == (0, OUTPUT_ID)
        assert float(weight) == -1.5
        assert enabled == "1"
        assert int(innovation) == 0
