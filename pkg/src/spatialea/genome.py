"""CPPN genotypes and NEAT-style variation operators.

A genome is a small feed-forward function graph queried over the coordinates
of a source and a target neuron; its scalar output becomes a controller
connection weight. Structural genes carry innovation numbers handed out by a
run-global registry so that crossover can align genes across lineages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

NUM_QUERY_INPUTS = 4  # source x, source y, target x, target y
INPUT_IDS = (0, 1, 2, 3)
OUTPUT_ID = 4

ACTIVATIONS = ("identity", "sigmoid", "tanh", "sine", "gaussian", "abs")


def apply_activation(name: str, x: float) -> float:
    if name == "identity":
        return x
    if name == "sigmoid":
        return 1.0 / (1.0 + math.exp(-max(-60.0, min(60.0, x))))
    if name == "tanh":
        return math.tanh(x)
    if name == "sine":
        return math.sin(x)
    if name == "gaussian":
        return math.exp(-0.5 * x * x)
    if name == "abs":
        return abs(x)
    raise ValueError(f"unknown activation: {name}")


@dataclass(frozen=True)
class NodeGene:
    id: int
    activation: str
    layer: str  # "input" | "hidden" | "output"


@dataclass(frozen=True)
class ConnectionGene:
    source: int
    target: int
    weight: float
    enabled: bool
    innovation: int


@dataclass(frozen=True)
class VariationRates:
    """Mutation and recombination rates, plus weight scales."""

    weight_mutation_prob: float = 0.8
    mutation_std: float = 0.5
    add_connection_prob: float = 0.05
    add_node_prob: float = 0.03
    crossover_prob: float = 0.9
    init_weight_std: float = 3.0

    def __post_init__(self):
        for name in ("weight_mutation_prob", "add_connection_prob", "add_node_prob", "crossover_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.mutation_std <= 0 or self.init_weight_std <= 0:
            raise ValueError("weight scales must be positive")


class InnovationRegistry:
    """Run-global bookkeeping of structural changes.

    The same (source, target) connection added anywhere in a run receives the
    same innovation number, and splitting the same connection yields the same
    hidden-node id, so crossover alignment stays meaningful population-wide.
    One registry per run; never shared across runs.
    """

    def __init__(self):
        self._conn_numbers: dict[tuple[int, int], int] = {}
        self._split_nodes: dict[tuple[int, int], list[int]] = {}
        self._next_innovation = 0
        self._next_node_id = OUTPUT_ID + 1

    def connection_innovation(self, source: int, target: int) -> int:
        key = (source, target)
        if key not in self._conn_numbers:
            self._conn_numbers[key] = self._next_innovation
            self._next_innovation += 1
        return self._conn_numbers[key]

    def split_node_id(self, source: int, target: int, taken: set[int]) -> int:
        """Node id for splitting source->target, reusing ids where possible.

        Reuse keeps parallel splits of the same connection aligned across
        genomes; ids already present in the splitting genome are skipped so
        node ids stay unique within it.
        """
        ids = self._split_nodes.setdefault((source, target), [])
        for node_id in ids:
            if node_id not in taken:
                return node_id
        node_id = self._next_node_id
        self._next_node_id += 1
        ids.append(node_id)
        return node_id


@dataclass(frozen=True)
class Genome:
    """Immutable CPPN genotype: node genes plus innovation-numbered connections."""

    nodes: tuple[NodeGene, ...]
    connections: tuple[ConnectionGene, ...]

    def node_ids(self) -> set[int]:
        return {n.id for n in self.nodes}

    def enabled_connections(self) -> list[ConnectionGene]:
        return [c for c in self.connections if c.enabled]

    def innovations(self) -> set[int]:
        return {c.innovation for c in self.connections}


def _would_cycle(edges: set[tuple[int, int]], source: int, target: int) -> bool:
    """True if adding source->target creates a directed cycle."""
    if source == target:
        return True
    # Cycle iff target already reaches source.
    stack = [target]
    seen = {target}
    adjacency: dict[int, list[int]] = {}
    for s, t in edges:
        adjacency.setdefault(s, []).append(t)
    while stack:
        node = stack.pop()
        if node == source:
            return True
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def topological_order(genome: Genome) -> list[int]:
    """Node ids sorted so every enabled connection goes forward.

    Raises ValueError if the enabled subgraph has a cycle; elsewhere the code
    maintains acyclicity as an invariant, so this doubles as a checker.
    """
    ids = sorted(genome.node_ids())
    incoming: dict[int, int] = {i: 0 for i in ids}
    adjacency: dict[int, list[int]] = {i: [] for i in ids}
    for c in genome.enabled_connections():
        incoming[c.target] += 1
        adjacency[c.source].append(c.target)
    ready = [i for i in ids if incoming[i] == 0]
    order: list[int] = []
    while ready:
        node = min(ready)  # deterministic order
        ready.remove(node)
        order.append(node)
        for nxt in adjacency[node]:
            incoming[nxt] -= 1
            if incoming[nxt] == 0:
                ready.append(nxt)
    if len(order) != len(ids):
        raise ValueError("enabled connection graph has a cycle")
    return order


def is_acyclic(genome: Genome) -> bool:
    try:
        topological_order(genome)
        return True
    except ValueError:
        return False


def init_genome(rng: np.random.Generator, rates: VariationRates, registry: InnovationRegistry) -> Genome:
    """Fresh genotype: 4 coordinate inputs fully wired to one identity output.

    Initial weights come from a zero-mean normal with the broad init scale.
    Half the time, one or two hidden nodes (random activations) are spliced
    into randomly chosen connections, standard node-insertion style.
    """
    nodes = [NodeGene(i, "identity", "input") for i in INPUT_IDS]
    nodes.append(NodeGene(OUTPUT_ID, "identity", "output"))
    connections = [
        ConnectionGene(
            source=i,
            target=OUTPUT_ID,
            weight=float(rng.normal(0.0, rates.init_weight_std)),
            enabled=True,
            innovation=registry.connection_innovation(i, OUTPUT_ID),
        )
        for i in INPUT_IDS
    ]
    genome = Genome(nodes=tuple(nodes), connections=tuple(connections))
    if rng.random() < 0.5:
        for _ in range(int(rng.integers(1, 3))):
            genome = _add_node(genome, rng, registry)
    return genome


def query_cppn(genome: Genome, x1: float, y1: float, x2: float, y2: float) -> float:
    """Evaluate the CPPN at one coordinate quadruple."""
    values: dict[int, float] = {0: x1, 1: y1, 2: x2, 3: y2}
    incoming: dict[int, list[ConnectionGene]] = {}
    for c in genome.enabled_connections():
        incoming.setdefault(c.target, []).append(c)
    act = {n.id: n.activation for n in genome.nodes}
    for node_id in topological_order(genome):
        if node_id in values:
            continue  # inputs carry raw coordinates
        total = 0.0
        for c in incoming.get(node_id, ()):
            total += c.weight * values[c.source]
        values[node_id] = apply_activation(act[node_id], total)
    return values[OUTPUT_ID]


def _perturb_weights(genome: Genome, rng: np.random.Generator, std: float) -> Genome:
    connections = tuple(
        replace(c, weight=c.weight + float(rng.normal(0.0, std))) for c in genome.connections
    )
    return replace(genome, connections=connections)


def _add_connection(genome: Genome, rng: np.random.Generator, rates: VariationRates,
                    registry: InnovationRegistry) -> Genome:
    """Add one random legal connection; no-op when no legal site exists."""
    existing = {(c.source, c.target) for c in genome.connections}
    enabled_edges = {(c.source, c.target) for c in genome.enabled_connections()}
    sources = [n.id for n in genome.nodes if n.layer != "output"]
    targets = [n.id for n in genome.nodes if n.layer != "input"]
    candidates = [
        (s, t)
        for s in sources
        for t in targets
        if s != t and (s, t) not in existing and not _would_cycle(enabled_edges, s, t)
    ]
    if not candidates:
        return genome
    s, t = candidates[int(rng.integers(len(candidates)))]
    gene = ConnectionGene(
        source=s,
        target=t,
        weight=float(rng.normal(0.0, rates.init_weight_std)),
        enabled=True,
        innovation=registry.connection_innovation(s, t),
    )
    return replace(genome, connections=genome.connections + (gene,))


def _add_node(genome: Genome, rng: np.random.Generator, registry: InnovationRegistry) -> Genome:
    """Split a random enabled connection into two through a new hidden node."""
    enabled = genome.enabled_connections()
    if not enabled:
        return genome
    old = enabled[int(rng.integers(len(enabled)))]
    node_id = registry.split_node_id(old.source, old.target, genome.node_ids())
    activation = ACTIVATIONS[int(rng.integers(len(ACTIVATIONS)))]
    node = NodeGene(node_id, activation, "hidden")
    into = ConnectionGene(old.source, node_id, 1.0, True,
                          registry.connection_innovation(old.source, node_id))
    out = ConnectionGene(node_id, old.target, old.weight, True,
                         registry.connection_innovation(node_id, old.target))
    connections = tuple(
        replace(c, enabled=False) if c is old else c for c in genome.connections
    ) + (into, out)
    return Genome(nodes=genome.nodes + (node,), connections=connections)


def mutate(genome: Genome, rng: np.random.Generator, rates: VariationRates,
           registry: InnovationRegistry) -> Genome:
    """Apply weight perturbation, add-connection, and add-node independently."""
    out = genome
    if rng.random() < rates.weight_mutation_prob:
        out = _perturb_weights(out, rng, rates.mutation_std)
    if rng.random() < rates.add_connection_prob:
        out = _add_connection(out, rng, rates, registry)
    if rng.random() < rates.add_node_prob:
        out = _add_node(out, rng, registry)
    return out


def crossover(a: Genome, b: Genome, fitness_a: float, fitness_b: float,
              rng: np.random.Generator) -> Genome:
    """Innovation-aligned recombination.

    Matching genes come from either parent uniformly at random; disjoint and
    excess genes come from the fitter parent (parent a on ties). A gene
    disabled in either parent stays disabled with probability 0.75. Inherited
    genes that would close a cycle in the enabled subgraph are dropped.
    """
    genes_a = {c.innovation: c for c in a.connections}
    genes_b = {c.innovation: c for c in b.connections}
    fitter, other = (a, b) if fitness_a >= fitness_b else (b, a)
    fitter_genes = genes_a if fitness_a >= fitness_b else genes_b

    chosen: list[ConnectionGene] = []
    for innovation in sorted(set(genes_a) | set(genes_b)):
        in_a, in_b = innovation in genes_a, innovation in genes_b
        if in_a and in_b:
            gene = genes_a[innovation] if rng.random() < 0.5 else genes_b[innovation]
            disabled_somewhere = not (genes_a[innovation].enabled and genes_b[innovation].enabled)
        elif innovation in fitter_genes:
            gene = fitter_genes[innovation]
            disabled_somewhere = not gene.enabled
        else:
            continue  # disjoint/excess on the weaker side
        if disabled_somewhere:
            gene = replace(gene, enabled=rng.random() >= 0.75)
        chosen.append(gene)

    # Drop genes whose enabled edge would close a cycle, in innovation order.
    edges: set[tuple[int, int]] = set()
    kept: list[ConnectionGene] = []
    for gene in chosen:
        if gene.enabled:
            if _would_cycle(edges, gene.source, gene.target):
                continue
            edges.add((gene.source, gene.target))
        kept.append(gene)

    node_lookup = {n.id: n for n in b.nodes}
    node_lookup.update({n.id: n for n in a.nodes})  # prefer parent a's version
    needed = set(INPUT_IDS) | {OUTPUT_ID}
    for gene in kept:
        needed.add(gene.source)
        needed.add(gene.target)
    nodes = tuple(node_lookup[i] for i in sorted(needed))
    return Genome(nodes=nodes, connections=tuple(kept))


def reproduce(a: Genome, b: Genome, fitness_a: float, fitness_b: float,
              rng: np.random.Generator, rates: VariationRates,
              registry: InnovationRegistry) -> Genome:
    """Crossover with the configured probability (else clone parent a), then mutate."""
    if rng.random() < rates.crossover_prob:
        child = crossover(a, b, fitness_a, fitness_b, rng)
    else:
        child = a
    return mutate(child, rng, rates, registry)


def genome_to_text(genome: Genome) -> str:
    """Line-oriented record: node list, then connections with all five gene fields."""
    lines = [f"nodes {len(genome.nodes)}"]
    for n in genome.nodes:
        lines.append(f"{n.id} {n.activation} {n.layer}")
    lines.append(f"connections {len(genome.connections)}")
    for c in genome.connections:
        lines.append(f"{c.source} {c.target} {c.weight!r} {int(c.enabled)} {c.innovation}")
    return "\n".join(lines) + "\n"


def genome_from_text(text: str) -> Genome:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    kind, count = lines[0].split()
    if kind != "nodes":
        raise ValueError("genome record must start with a node list")
    n_nodes = int(count)
    nodes = []
    for ln in lines[1 : 1 + n_nodes]:
        node_id, activation, layer = ln.split()
        nodes.append(NodeGene(int(node_id), activation, layer))
    kind, count = lines[1 + n_nodes].split()
    if kind != "connections":
        raise ValueError("node list must be followed by a connection list")
    n_conns = int(count)
    connections = []
    for ln in lines[2 + n_nodes : 2 + n_nodes + n_conns]:
        source, target, weight, enabled, innovation = ln.split()
        connections.append(
            ConnectionGene(int(source), int(target), float(weight), bool(int(enabled)), int(innovation))
        )
    return Genome(nodes=tuple(nodes), connections=tuple(connections))
