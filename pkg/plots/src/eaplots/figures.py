"""Figure builders: pure data preparation plus matplotlib rendering.

The data-prep helpers (seam splitting, heatmap aggregation, curve stacking)
are separated from the drawing so the numbers on a figure can be tested
directly against the input files.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import matplotlib.pyplot as plt
from matplotlib.patches import Circle

from .io import (
    read_generations,
    read_genome_fitness,
    read_outcomes,
    read_trajectories,
    read_zones,
    run_directories,
)

METRICS = ("mean_final_population", "mean_best_fitness", "completion_rate",
           "extinction_rate", "explosion_rate", "phi")


def split_on_seam(points: np.ndarray, width: float, height: float) -> list[np.ndarray]:
    """Break a wrapped trajectory into segments at torus seam crossings.

    A step larger than half the world on either axis is a wrap, not motion,
    so the polyline is split there.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return []
    steps = np.abs(np.diff(pts, axis=0))
    breaks = np.nonzero((steps[:, 0] > width / 2.0) | (steps[:, 1] > height / 2.0))[0]
    segments = []
    start = 0
    for b in breaks:
        segments.append(pts[start : b + 1])
        start = b + 1
    segments.append(pts[start:])
    return [seg for seg in segments if len(seg) > 0]


def _aggregate(records: list[dict], metric: str) -> float:
    statuses = [r["status"] for r in records]
    if metric == "mean_final_population":
        values = [r["final_population"] for r in records if r["final_population"] is not None]
        return float(np.mean(values)) if values else math.nan
    if metric == "mean_best_fitness":
        values = [r["best_fitness"] for r in records if r["best_fitness"] is not None]
        return float(np.mean(values)) if values else math.nan
    if metric == "completion_rate":
        return statuses.count("completed") / len(statuses)
    if metric == "extinction_rate":
        return statuses.count("extinct") / len(statuses)
    if metric == "explosion_rate":
        return statuses.count("exploded") / len(statuses)
    if metric == "phi":
        return (statuses.count("exploded") - statuses.count("extinct")) / len(statuses)
    raise ValueError(f"unknown metric: {metric} (choose from {', '.join(METRICS)})")


def heatmap_data(records: list[dict], x_param: str, y_param: str,
                 metric: str) -> tuple[list, list, np.ndarray]:
    """Aggregate outcome records onto an (x_param, y_param) grid.

    Returns sorted axis values and a matrix with y as rows, x as columns.
    """
    if not records:
        raise ValueError("no outcome records to aggregate")
    for param in (x_param, y_param):
        missing = [r for r in records if param not in r.get("cell", {})]
        if missing:
            raise ValueError(f"parameter {param} missing from {len(missing)} outcome records")
    xs = sorted({r["cell"][x_param] for r in records})
    ys = sorted({r["cell"][y_param] for r in records})
    matrix = np.full((len(ys), len(xs)), math.nan)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            bucket = [r for r in records
                      if r["cell"][x_param] == x and r["cell"][y_param] == y]
            if bucket:
                matrix[i, j] = _aggregate(bucket, metric)
    return xs, ys, matrix


def build_heatmap_figure(records: list[dict], x_param: str, y_param: str, metric: str):
    """Annotated grid of an aggregate metric over two swept parameters."""
    xs, ys, matrix = heatmap_data(records, x_param, y_param, metric)
    fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(xs), 1.0 + 0.9 * len(ys)))
    image = ax.imshow(matrix, origin="lower", aspect="auto", cmap="viridis")
    for i in range(len(ys)):
        for j in range(len(xs)):
            if not math.isnan(matrix[i, j]):
                ax.text(j, i, f"{matrix[i, j]:.3f}", ha="center", va="center",
                        color="white", fontsize=9)
    ax.set_xticks(range(len(xs)), [str(x) for x in xs])
    ax.set_yticks(range(len(ys)), [str(y) for y in ys])
    ax.set_xlabel(x_param)
    ax.set_ylabel(y_param)
    ax.set_title(metric)
    fig.colorbar(image, ax=ax)
    return fig


def plot_heatmap(in_dir: str | Path, x_param: str, y_param: str, metric: str,
                 out_path: str | Path, cell_filter: str | None = None):
    records = _filtered_outcomes(in_dir, cell_filter)
    return _save(build_heatmap_figure(records, x_param, y_param, metric), out_path)


def build_trajectory_figure(agents: dict[int, list[tuple[float, float]]],
                            zones: list[tuple[float, float, float]],
                            fitness: dict[int, float | None],
                            world: tuple[float, float], generation: int):
    """Per-agent movement paths for one generation, with zone overlays.

    Polylines break at the torus seam instead of drawing spurious full-width
    lines; zones render as dashed circles at world scale; agents are labeled
    with their id and, when the genotype log is present, their fitness.
    """
    width, height = world
    fig, ax = plt.subplots(figsize=(7.0, 7.0))
    cmap = plt.get_cmap("tab20")
    for agent_id in sorted(agents):
        pts = np.array(agents[agent_id])
        color = cmap(agent_id % 20)
        for segment in split_on_seam(pts, width, height):
            if len(segment) == 1:
                ax.plot(segment[0, 0], segment[0, 1], marker="s", color=color,
                        markersize=4)
            else:
                ax.plot(segment[:, 0], segment[:, 1], color=color, linewidth=1.0)
        end = pts[-1]
        ax.plot(end[0], end[1], marker="s", color=color, markersize=6)
        label = str(agent_id)
        if fitness.get(agent_id) is not None:
            label += f"\n{fitness[agent_id]:.2f}"
        ax.annotate(label, (end[0], end[1]), fontsize=7, xytext=(3, 3),
                    textcoords="offset points")
    for cx, cy, radius in zones:
        ax.add_patch(Circle((cx, cy), radius, fill=False, linestyle="--",
                            edgecolor="deeppink", linewidth=1.2))
    ax.set_xlim(0, width)
    ax.set_ylim(0, height)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"generation {generation}")
    return fig


def plot_trajectory(run_dir: str | Path, generation: int, out_path: str | Path,
                    world: tuple[float, float] = (25.0, 25.0)):
    run_dir = Path(run_dir)
    traj_path = run_dir / "trajectories" / f"gen_{generation}.csv"
    if not traj_path.exists():
        raise FileNotFoundError(f"no trajectory file {traj_path}")
    agents = read_trajectories(traj_path)

    zones: list[tuple[float, float, float]] = []
    zones_path = run_dir / "zones.csv"
    if zones_path.exists():
        zones = read_zones(zones_path, generation)

    fitness: dict[int, float | None] = {}
    genome_path = run_dir / "genomes" / f"gen_{generation}.txt"
    if genome_path.exists():
        fitness = read_genome_fitness(genome_path)

    fig = build_trajectory_figure(agents, zones, fitness, world, generation)
    return _save(fig, out_path)


def curve_data(root: str | Path, cell_filter: str | None = None
               ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack per-run generations.csv files into (generations, population, best).

    Rows are padded with the run's terminal value so early-terminating runs
    still contribute to every generation's aggregate.
    """
    runs = [d for cell, d in run_directories(root)
            if cell_filter is None or cell_filter in cell]
    if not runs:
        raise ValueError(f"no runs found under {root}"
                         + (f" matching {cell_filter!r}" if cell_filter else ""))
    series = []
    for run_dir in runs:
        rows = read_generations(run_dir / "generations.csv")
        pop = [int(r["population_size"]) for r in rows]
        best = [float(r["best_fitness"]) if r["best_fitness"] else math.nan for r in rows]
        series.append((pop, best))
    horizon = max(len(pop) for pop, _ in series)
    population = np.full((len(series), horizon), math.nan)
    fitness = np.full((len(series), horizon), math.nan)
    for k, (pop, best) in enumerate(series):
        population[k, : len(pop)] = pop
        population[k, len(pop):] = pop[-1]
        fitness[k, : len(best)] = best
        fitness[k, len(best):] = best[-1]
    generations = np.arange(1, horizon + 1)
    return generations, population, fitness


def plot_curves(in_dir: str | Path, out_path: str | Path,
                cell_filter: str | None = None):
    """Aggregate population and best-fitness trajectories across runs."""
    generations, population, fitness = curve_data(in_dir, cell_filter)
    fig, (ax_pop, ax_fit) = plt.subplots(2, 1, figsize=(8.0, 6.0), sharex=True)
    for ax, data, label in ((ax_pop, population, "population size"),
                            (ax_fit, fitness, "best fitness")):
        mean = np.nanmean(data, axis=0)
        std = np.nanstd(data, axis=0)
        ax.plot(generations, mean, color="tab:blue")
        ax.fill_between(generations, mean - std, mean + std, alpha=0.25,
                        color="tab:blue")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    ax_fit.set_xlabel("generation")
    ax_pop.set_title(f"aggregate over {population.shape[0]} runs")
    return _save(fig, out_path)


def plot_histogram(in_dir: str | Path, out_path: str | Path,
                   cell_filter: str | None = None):
    """Distribution of final population sizes across runs."""
    records = _filtered_outcomes(in_dir, cell_filter)
    finals = [r["final_population"] for r in records if r["final_population"] is not None]
    if not finals:
        raise ValueError("no final population values to plot")
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.hist(finals, bins=20, color="tab:blue", edgecolor="black")
    ax.set_xlabel("final population")
    ax.set_ylabel("runs")
    ax.set_title(f"{len(finals)} runs")
    return _save(fig, out_path)


def plot_scatter(in_dir: str | Path, out_path: str | Path,
                 cell_filter: str | None = None):
    """Final population against best fitness, colored by terminal status."""
    records = _filtered_outcomes(in_dir, cell_filter)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    colors = {"completed": "tab:green", "extinct": "tab:red",
              "exploded": "tab:purple", "failed": "tab:gray"}
    for status, color in colors.items():
        xs = [r["best_fitness"] for r in records
              if r["status"] == status and r["best_fitness"] is not None]
        ys = [r["final_population"] for r in records
              if r["status"] == status and r["best_fitness"] is not None]
        if xs:
            ax.scatter(xs, ys, c=color, label=status, s=25, alpha=0.8)
    ax.set_xlabel("best final fitness")
    ax.set_ylabel("final population")
    ax.legend()
    return _save(fig, out_path)


def _filtered_outcomes(in_dir: str | Path, cell_filter: str | None) -> list[dict]:
    records = read_outcomes(in_dir)
    if cell_filter is not None:
        records = [r for r in records
                   if cell_filter in ",".join(f"{k.rsplit('.', 1)[-1]}={v}"
                                              for k, v in sorted(r.get("cell", {}).items()))]
    if not records:
        raise ValueError(f"no outcome records under {in_dir}"
                         + (f" matching {cell_filter!r}" if cell_filter else ""))
    return records


def _save(fig, out_path: str | Path):
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path
