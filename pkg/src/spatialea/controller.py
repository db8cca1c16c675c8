"""Fixed substrate controller generated from a CPPN genotype.

The controller is a two-layer feed-forward network whose weights are produced
by querying the genome over neuron coordinates, with small weights pruned to
exact zero. Inputs per tick: current joint angles, four oscillator signals,
a two-component directional cue, and a constant bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .genome import Genome, query_cppn

JOINT_LIMIT = math.pi / 2.0


@dataclass(frozen=True)
class SubstrateConfig:
    joints: int = 8
    prune_threshold: float = 0.2
    cpg_frequency: float = 1.0  # Hz
    # Optional explicit neuron layout: ((x, y), ...) per layer. Defaults to
    # evenly spaced rows at y = -1 (input), 0 (hidden), +1 (output).
    layout: tuple[tuple[tuple[float, float], ...], ...] | None = None

    def __post_init__(self):
        if self.joints < 2 or self.joints % 2 != 0:
            raise ValueError("joint count must be an even integer >= 2")
        if self.prune_threshold < 0:
            raise ValueError("prune threshold must be >= 0")
        if self.cpg_frequency <= 0:
            raise ValueError("oscillator frequency must be positive")

    @property
    def num_inputs(self) -> int:
        return self.joints + 7

    def layer_coordinates(self) -> tuple[list[tuple[float, float]], ...]:
        if self.layout is not None:
            inputs, hidden, outputs = self.layout
            if len(inputs) != self.num_inputs or len(hidden) != self.joints or len(outputs) != self.joints:
                raise ValueError("layout sizes must match the substrate shape")
            return (list(inputs), list(hidden), list(outputs))
        return (
            _row(self.num_inputs, -1.0),
            _row(self.joints, 0.0),
            _row(self.joints, 1.0),
        )


def _row(size: int, y: float) -> list[tuple[float, float]]:
    xs = np.linspace(-1.0, 1.0, size) if size > 1 else np.array([0.0])
    return [(float(x), y) for x in xs]


@dataclass(frozen=True)
class SubstrateNetwork:
    """Dense weight matrices after pruning; hidden activation is tanh."""

    input_hidden: np.ndarray  # (n+7, n)
    hidden_output: np.ndarray  # (n, n)

    @property
    def num_inputs(self) -> int:
        return self.input_hidden.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.hidden_output.shape[1]

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.input_hidden) + np.count_nonzero(self.hidden_output))


def build_substrate(genome: Genome, cfg: SubstrateConfig) -> SubstrateNetwork:
    """Query the CPPN for every inter-layer pair and prune sub-threshold weights."""
    inputs, hidden, outputs = cfg.layer_coordinates()

    def layer_weights(src: list[tuple[float, float]], dst: list[tuple[float, float]]) -> np.ndarray:
        w = np.empty((len(src), len(dst)))
        for i, (x1, y1) in enumerate(src):
            for j, (x2, y2) in enumerate(dst):
                w[i, j] = query_cppn(genome, x1, y1, x2, y2)
        w[np.abs(w) < cfg.prune_threshold] = 0.0
        return w

    return SubstrateNetwork(
        input_hidden=layer_weights(inputs, hidden),
        hidden_output=layer_weights(hidden, outputs),
    )


def assemble_inputs(joint_angles: np.ndarray, t: float, direction: tuple[float, float],
                    cfg: SubstrateConfig) -> np.ndarray:
    """Input vector [angles; 4 oscillators; direction; bias], length joints + 7."""
    phase = 2.0 * math.pi * cfg.cpg_frequency * t
    return np.concatenate([
        joint_angles,
        [math.sin(phase), math.cos(phase), math.sin(2.0 * phase), math.cos(2.0 * phase)],
        [direction[0], direction[1]],
        [1.0],
    ])


def forward(net: SubstrateNetwork, inputs: np.ndarray) -> np.ndarray:
    """Joint position targets, clipped to the actuator limits."""
    hidden = np.tanh(inputs @ net.input_hidden)
    raw = hidden @ net.hidden_output
    return np.clip(raw, -JOINT_LIMIT, JOINT_LIMIT)
