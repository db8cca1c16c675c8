"""Readers for the harness's documented output files.

This package talks to the simulator only through these formats:
trajectories/gen_<g>.csv, zones.csv, genomes/gen_<g>.txt, generations.csv,
and the line-delimited outcome records (outcomes.jsonl / outcome.jsonl).
"""

from __future__ import annotations

import json
from pathlib import Path


class MalformedInput(ValueError):
    """An input file failed to parse; the message names file and line."""


def read_trajectories(path: str | Path) -> dict[int, list[tuple[float, float]]]:
    """Per-agent position sequences from a trajectory CSV, keyed by agent id."""
    path = Path(path)
    agents: dict[int, list[tuple[float, float]]] = {}
    with path.open() as fh:
        header = fh.readline().rstrip("\n")
        if header != "generation,agent_id,tick,x,y":
            raise MalformedInput(f"{path}:1: unexpected header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != 5:
                raise MalformedInput(f"{path}:{lineno}: expected 5 columns, got {len(parts)}")
            try:
                agent = int(parts[1])
                x, y = float(parts[3]), float(parts[4])
            except ValueError as exc:
                raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
            agents.setdefault(agent, []).append((x, y))
    return agents


def read_zones(path: str | Path, generation: int) -> list[tuple[float, float, float]]:
    """(center_x, center_y, radius) rows for one generation of zones.csv."""
    path = Path(path)
    zones = []
    with path.open() as fh:
        fh.readline()
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != 5:
                raise MalformedInput(f"{path}:{lineno}: expected 5 columns, got {len(parts)}")
            if int(parts[0]) == generation:
                zones.append((float(parts[2]), float(parts[3]), float(parts[4])))
    return zones


def read_genome_fitness(path: str | Path) -> dict[int, float | None]:
    """Agent id -> fitness from a per-generation genotype log."""
    out: dict[int, float | None] = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("individual "):
            _, ind_id, _, fitness = line.split()
            out[int(ind_id)] = None if fitness == "-" else float(fitness)
    return out


def read_generations(path: str | Path) -> list[dict[str, str]]:
    """generations.csv rows as dicts of raw strings."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise MalformedInput(f"{path}:1: empty file")
    columns = lines[0].split(",")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(columns):
            raise MalformedInput(f"{path}:{lineno}: expected {len(columns)} columns")
        rows.append(dict(zip(columns, parts)))
    return rows


def read_outcomes(root: str | Path) -> list[dict]:
    """All outcome records under a run or sweep directory."""
    root = Path(root)
    if root.is_file():
        files = [root]
    else:
        top = root / "outcomes.jsonl"
        files = [top] if top.exists() else sorted(root.rglob("outcome.jsonl"))
    records = []
    for path in files:
        for lineno, line in enumerate(path.read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
    return records


def run_directories(root: str | Path) -> list[tuple[str, Path]]:
    """(cell name, run directory) pairs under a sweep root, sorted."""
    root = Path(root)
    runs = []
    for outcome in sorted(root.rglob("outcome.jsonl")):
        run_dir = outcome.parent
        cell = run_dir.parent.name if run_dir.parent != root else ""
        runs.append((cell, run_dir))
    return runs
