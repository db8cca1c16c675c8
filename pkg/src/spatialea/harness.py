"""Experiment orchestration: configs, seeded runs, sweeps, and analysis.

Configs are YAML documents with one section per subsystem; unknown keys are
rejected and every error names the offending path. Runs write diff-friendly
columnar logs plus a line-delimited outcome record. Sweeps fan a seeded grid
out over a worker pool and aggregate deterministically regardless of
scheduling.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, get_type_hints

import numpy as np
import yaml

from .controller import SubstrateConfig
from .engine import (
    COMPLETED,
    EXPLODED,
    EXTINCT,
    RUNNING,
    EngineConfig,
    GenerationRecord,
    RunOutcome,
    check_termination,
    init_state,
    run_generation,
)
from .genome import VariationRates, genome_to_text
from .locomotion import FitnessConfig, KinematicsConfig
from .selection import DeathSelectionConfig, ParentSelectionConfig
from .world import WorldConfig

OUTPUT_ENV_VAR = "SPATIALEA_OUT"


class ConfigError(ValueError):
    """Configuration rejected; the message names the offending path."""


@dataclass(frozen=True)
class LoggingConfig:
    trajectories: bool = True
    genotypes: bool = True


_SECTIONS: dict[str, type] = {
    "world": WorldConfig,
    "substrate": SubstrateConfig,
    "kinematics": KinematicsConfig,
    "fitness": FitnessConfig,
    "variation": VariationRates,
    "parent_selection": ParentSelectionConfig,
    "death_selection": DeathSelectionConfig,
    "engine": EngineConfig,
    "logging": LoggingConfig,
}

# Fields never exposed through the YAML surface.
_HIDDEN_FIELDS = {("substrate", "layout")}


@dataclass(frozen=True)
class ExperimentConfig:
    """Every knob of one run, plus replication and output settings."""

    world: WorldConfig = WorldConfig()
    substrate: SubstrateConfig = SubstrateConfig()
    kinematics: KinematicsConfig = KinematicsConfig()
    fitness: FitnessConfig = FitnessConfig()
    variation: VariationRates = VariationRates()
    parent_selection: ParentSelectionConfig = ParentSelectionConfig()
    death_selection: DeathSelectionConfig = DeathSelectionConfig()
    engine: EngineConfig = EngineConfig()
    logging: LoggingConfig = LoggingConfig()
    runs: int = 10
    base_seed: int = 42
    output_dir: str = ""


def _coerce(value: Any, hint: Any, path: str) -> Any:
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if hint == tuple[float, float]:
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(f"{path}: expected a pair of numbers, got {value!r}")
        return (float(value[0]), float(value[1]))
    raise ConfigError(f"{path}: unsupported value {value!r}")


def _build_section(name: str, cls: type, data: Any) -> Any:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{name}: expected a mapping")
    hints = get_type_hints(cls)
    allowed = {f.name for f in fields(cls) if (name, f.name) not in _HIDDEN_FIELDS}
    kwargs = {}
    for key, value in data.items():
        if key not in allowed:
            raise ConfigError(f"{name}.{key}: unknown key")
        kwargs[key] = _coerce(value, hints[key], f"{name}.{key}")
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def load_config(text: str) -> ExperimentConfig:
    """Parse a YAML config document, filling defaults and rejecting junk."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")

    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            kwargs[key] = _build_section(key, _SECTIONS[key], value)
        elif key == "runs":
            kwargs[key] = _coerce(value, int, "runs")
        elif key == "base_seed":
            kwargs[key] = _coerce(value, int, "base_seed")
        elif key == "output_dir":
            kwargs[key] = _coerce(value, str, "output_dir")
        else:
            raise ConfigError(f"{key}: unknown key")
    cfg = ExperimentConfig(**kwargs)
    if cfg.runs < 1:
        raise ConfigError("runs: must be >= 1")
    return cfg


def load_config_file(path: str | Path) -> ExperimentConfig:
    return load_config(Path(path).read_text())


def config_to_dict(cfg: ExperimentConfig) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        section = getattr(cfg, name)
        out[name] = {
            f.name: (list(v) if isinstance(v := getattr(section, f.name), tuple) else v)
            for f in fields(cls)
            if (name, f.name) not in _HIDDEN_FIELDS
        }
    out["runs"] = cfg.runs
    out["base_seed"] = cfg.base_seed
    out["output_dir"] = cfg.output_dir
    return out


def serialize_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=True)


def set_config_value(cfg: ExperimentConfig, path: str, value: Any) -> ExperimentConfig:
    """Return a copy of cfg with the dotted field path replaced."""
    parts = path.split(".")
    if len(parts) != 2 or parts[0] not in _SECTIONS:
        raise ConfigError(f"{path}: not a valid parameter path")
    section_name, field_name = parts
    cls = _SECTIONS[section_name]
    if field_name not in {f.name for f in fields(cls)} or (section_name, field_name) in _HIDDEN_FIELDS:
        raise ConfigError(f"{path}: not a valid parameter path")
    hints = get_type_hints(cls)
    coerced = _coerce(value, hints[field_name], path)
    try:
        section = replace(getattr(cfg, section_name), **{field_name: coerced})
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return replace(cfg, **{section_name: section})


@dataclass(frozen=True)
class SweepSpec:
    """A base config plus an ordered grid of dotted paths to value lists."""

    base: ExperimentConfig
    grid: tuple[tuple[str, tuple[Any, ...]], ...]

    def cells(self) -> list[dict[str, Any]]:
        """Cross product of the grid, last axis varying fastest."""
        paths = [p for p, _ in self.grid]
        value_lists = [v for _, v in self.grid]
        return [dict(zip(paths, combo)) for combo in itertools.product(*value_lists)]


def load_sweep_grid(text: str, base: ExperimentConfig) -> SweepSpec:
    data = yaml.safe_load(text)
    if not isinstance(data, dict) or "grid" not in data or not isinstance(data["grid"], dict):
        raise ConfigError("grid file must contain a 'grid' mapping")
    grid = []
    for path, values in data["grid"].items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{path}: grid values must be a nonempty list")
        set_config_value(base, path, values[0])  # validates the path and value type
        grid.append((path, tuple(values)))
    return SweepSpec(base=base, grid=tuple(grid))


def cell_name(cell: dict[str, Any]) -> str:
    if not cell:
        return "single"
    shorts = [p.rsplit(".", 1)[-1] for p in cell]
    names = shorts if len(set(shorts)) == len(shorts) else list(cell)
    return ",".join(f"{n}={v}" for n, v in zip(names, cell.values()))


def stable_seed(base_seed: int, cell_index: int, run_index: int) -> int:
    """Deterministic per-run seed; adding cells never shifts other streams."""
    digest = hashlib.sha256(f"{base_seed}:{cell_index}:{run_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


GENERATION_COLUMNS = (
    "generation,population_size,best_fitness,mean_fitness,median_fitness,"
    "std_fitness,mating_count,mean_pair_distance,spatial_dispersion,mean_energy,zone_occupancy"
)


def _generation_row(rec: GenerationRecord) -> str:
    occupancy = "" if rec.zone_occupancy is None else ";".join(str(c) for c in rec.zone_occupancy)
    return ",".join([
        str(rec.generation),
        str(rec.population_size),
        _fmt(rec.best_fitness),
        _fmt(rec.mean_fitness),
        _fmt(rec.median_fitness),
        _fmt(rec.std_fitness),
        str(rec.mating_count),
        _fmt(rec.mean_pair_distance),
        _fmt(rec.spatial_dispersion),
        _fmt(rec.mean_energy),
        occupancy,
    ])


def run_experiment(cfg: ExperimentConfig, seed: int, out_dir: Path | None = None,
                   cell: dict[str, Any] | None = None) -> RunOutcome:
    """One seeded run: incubation, spatial loop to termination, log writing."""
    rng = np.random.default_rng(seed)
    state = init_state(cfg, rng)
    records: list[GenerationRecord] = []

    gen_file = matings_file = zones_file = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        gen_file = (out_dir / "generations.csv").open("w", newline="\n")
        gen_file.write(GENERATION_COLUMNS + "\n")
        matings_file = (out_dir / "matings.csv").open("w", newline="\n")
        matings_file.write("generation,parent_a,parent_b,distance,zone\n")
        if cfg.parent_selection.uses_zones:
            zones_file = (out_dir / "zones.csv").open("w", newline="\n")
            zones_file.write("generation,zone,center_x,center_y,radius\n")
        if cfg.logging.trajectories:
            (out_dir / "trajectories").mkdir(exist_ok=True)
        if cfg.logging.genotypes:
            (out_dir / "genomes").mkdir(exist_ok=True)

    status = check_termination(state, cfg.engine)
    try:
        while status == RUNNING:
            state, record = run_generation(state, cfg, rng)
            records.append(record)
            if out_dir is not None:
                _write_generation_logs(out_dir, cfg, state, record,
                                       gen_file, matings_file, zones_file)
            status = check_termination(state, cfg.engine)
    finally:
        for handle in (gen_file, matings_file, zones_file):
            if handle is not None:
                handle.close()

    outcome = RunOutcome(
        status=status,
        final_generation=state.generation,
        final_population=len(state.population),
        best_fitness=state.best_fitness,
        records=tuple(records),
    )
    if out_dir is not None:
        line = outcome_record(outcome, seed, cell)
        (out_dir / "outcome.jsonl").write_text(json.dumps(line, sort_keys=True) + "\n")
    return outcome


def _write_generation_logs(out_dir: Path, cfg: ExperimentConfig, state, record,
                           gen_file, matings_file, zones_file) -> None:
    artifacts = state.last_artifacts
    gen_file.write(_generation_row(record) + "\n")
    for a, b, distance, zone in artifacts.matings:
        matings_file.write(f"{record.generation},{a},{b},{distance!r},{zone}\n")
    if zones_file is not None:
        for k, zone in enumerate(artifacts.zones):
            zones_file.write(
                f"{record.generation},{k},{zone.center.x!r},{zone.center.y!r},{zone.radius!r}\n"
            )
    if cfg.logging.trajectories:
        path = out_dir / "trajectories" / f"gen_{record.generation}.csv"
        with path.open("w", newline="\n") as fh:
            fh.write("generation,agent_id,tick,x,y\n")
            for row, agent_id in enumerate(artifacts.agent_ids):
                traj = artifacts.trajectories[row]
                for tick in range(traj.shape[0]):
                    fh.write(
                        f"{record.generation},{agent_id},{tick},"
                        f"{float(traj[tick, 0])!r},{float(traj[tick, 1])!r}\n"
                    )
    if cfg.logging.genotypes:
        path = out_dir / "genomes" / f"gen_{record.generation}.txt"
        with path.open("w", newline="\n") as fh:
            for ind_id, fitness, genome in artifacts.acting_population:
                fh.write(f"individual {ind_id} fitness {_fmt(fitness) or '-'}\n")
                fh.write(genome_to_text(genome))
                fh.write("\n")


def outcome_record(outcome: RunOutcome, seed: int, cell: dict[str, Any] | None) -> dict[str, Any]:
    return {
        "seed": seed,
        "status": outcome.status,
        "final_generation": outcome.final_generation,
        "final_population": outcome.final_population,
        "best_fitness": outcome.best_fitness,
        "cell": cell or {},
    }


@dataclass(frozen=True)
class CellOutcomes:
    """All run outcomes for one grid cell, with tallies."""

    cell: dict[str, Any]
    name: str
    outcomes: tuple[dict[str, Any], ...]

    @property
    def extinct(self) -> int:
        return sum(1 for o in self.outcomes if o["status"] == EXTINCT)

    @property
    def exploded(self) -> int:
        return sum(1 for o in self.outcomes if o["status"] == EXPLODED)

    @property
    def completed(self) -> int:
        return sum(1 for o in self.outcomes if o["status"] == COMPLETED)

    @property
    def failed(self) -> int:
        return sum(1 for o in self.outcomes if o["status"] == "failed")

    def fitness_stats(self) -> tuple[float | None, float | None]:
        values = [o["best_fitness"] for o in self.outcomes
                  if o["status"] != "failed" and o["best_fitness"] is not None]
        if not values:
            return (None, None)
        arr = np.array(values)
        return (float(arr.mean()), float(arr.std()))


@dataclass(frozen=True)
class OutcomeTable:
    cells: tuple[CellOutcomes, ...]
    runs_per_cell: int


def _sweep_worker(args: tuple) -> dict[str, Any]:
    cfg, seed, run_dir, cell = args
    try:
        outcome = run_experiment(cfg, seed, Path(run_dir), cell)
        return outcome_record(outcome, seed, cell)
    except Exception as exc:  # a failed run is recorded, not dropped
        return {"seed": seed, "status": "failed", "error": str(exc),
                "final_generation": None, "final_population": None,
                "best_fitness": None, "cell": cell}


def run_sweep(spec: SweepSpec, runs_per_cell: int, base_seed: int, workers: int,
              out_root: Path) -> OutcomeTable:
    """Run the full grid, runs_per_cell seeded replicates per cell.

    Results are folded in cell-then-run order after all workers finish, so the
    table and the outcomes log are independent of scheduling.
    """
    if runs_per_cell < 1:
        raise ValueError("runs per cell must be >= 1")
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)

    cells = spec.cells()
    jobs = []
    keys: list[tuple[int, int]] = []
    for ci, cell in enumerate(cells):
        cfg = spec.base
        for path, value in cell.items():
            cfg = set_config_value(cfg, path, value)
        name = cell_name(cell)
        for r in range(runs_per_cell):
            seed = stable_seed(base_seed, ci, r)
            run_dir = out_root / name / str(seed)
            jobs.append((cfg, seed, str(run_dir), cell))
            keys.append((ci, r))

    if workers <= 1:
        results = [_sweep_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))

    by_key = dict(zip(keys, results))
    cell_rows: list[CellOutcomes] = []
    with (out_root / "outcomes.jsonl").open("w", newline="\n") as fh:
        for ci, cell in enumerate(cells):
            outcomes = tuple(by_key[(ci, r)] for r in range(runs_per_cell))
            for record in outcomes:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
            cell_rows.append(CellOutcomes(cell=cell, name=cell_name(cell), outcomes=outcomes))
    return OutcomeTable(cells=tuple(cell_rows), runs_per_cell=runs_per_cell)


def order_parameter(outcomes: list[str] | tuple[str, ...]) -> float:
    """(explosions - extinctions) / total runs, in [-1, 1].

    Completed (and failed) runs count in the denominator only.
    """
    if not outcomes:
        raise ValueError("order parameter needs at least one outcome")
    explosions = sum(1 for s in outcomes if s == EXPLODED)
    extinctions = sum(1 for s in outcomes if s == EXTINCT)
    return (explosions - extinctions) / len(outcomes)


def estimate_critical_point(zone_counts: list[float], phi_values: list[float]) -> float:
    """Zero crossing of the order parameter over sorted zone counts.

    Linear interpolation between the bracketing counts; exactly one sign
    change is required.
    """
    if len(zone_counts) != len(phi_values) or len(zone_counts) < 2:
        raise ValueError("need matching zone counts and order parameter values")
    order = np.argsort(zone_counts)
    ns = [float(zone_counts[i]) for i in order]
    phis = [float(phi_values[i]) for i in order]

    crossings = []
    for i in range(len(ns) - 1):
        a, b = phis[i], phis[i + 1]
        if a == 0.0:
            crossings.append(ns[i])
        elif a < 0.0 < b or a > 0.0 > b:
            crossings.append(ns[i] + (ns[i + 1] - ns[i]) * (-a) / (b - a))
    if phis[-1] == 0.0:
        crossings.append(ns[-1])

    if not crossings:
        raise ValueError("no transition in range")
    if len(crossings) > 1:
        raise ValueError(f"multiple transitions: {crossings}")
    return crossings[0]


def load_outcomes(out_root: Path) -> list[dict[str, Any]]:
    """Read run outcome records under a sweep or run directory."""
    out_root = Path(out_root)
    top = out_root / "outcomes.jsonl"
    files = [top] if top.exists() else sorted(out_root.rglob("outcome.jsonl"))
    records = []
    for path in files:
        for line in path.read_text().splitlines():
            if line.strip():
                records.append(json.loads(line))
    return records


def analyze(out_root: Path) -> dict[str, Any]:
    """Aggregate a results tree: per-cell tallies, order parameters, and the
    critical zone count when a zone-count axis is present.

    Writes analysis/phi_table.csv, analysis/phi_by_zone_count.csv (when
    applicable), and analysis/critical_point.json under out_root.
    """
    out_root = Path(out_root)
    records = load_outcomes(out_root)
    if not records:
        raise ValueError(f"no outcome records under {out_root}")

    by_cell: dict[tuple, list[dict[str, Any]]] = {}
    for rec in records:
        key = tuple(sorted(rec.get("cell", {}).items()))
        by_cell.setdefault(key, []).append(rec)

    analysis_dir = out_root / "analysis"
    analysis_dir.mkdir(parents=True, exist_ok=True)

    table_rows = []
    for key in sorted(by_cell, key=str):
        outcomes = by_cell[key]
        statuses = [o["status"] for o in outcomes]
        phi = order_parameter(statuses)
        fits = [o["best_fitness"] for o in outcomes if o.get("best_fitness") is not None]
        table_rows.append({
            "cell": dict(key),
            "runs": len(outcomes),
            "extinct": statuses.count(EXTINCT),
            "exploded": statuses.count(EXPLODED),
            "completed": statuses.count(COMPLETED),
            "failed": statuses.count("failed"),
            "phi": phi,
            "mean_best_fitness": float(np.mean(fits)) if fits else None,
        })

    with (analysis_dir / "phi_table.csv").open("w", newline="\n") as fh:
        fh.write("cell,runs,extinct,exploded,completed,failed,phi,mean_best_fitness\n")
        for row in table_rows:
            fh.write(",".join([
                '"' + cell_name(row["cell"]) + '"',
                str(row["runs"]), str(row["extinct"]), str(row["exploded"]),
                str(row["completed"]), str(row["failed"]),
                repr(row["phi"]), _fmt(row["mean_best_fitness"]),
            ]) + "\n")

    result: dict[str, Any] = {"cells": table_rows}

    zone_axis = None
    sample_cell = records[0].get("cell", {})
    for path in sample_cell:
        if path.rsplit(".", 1)[-1] == "zone_count":
            zone_axis = path
            break

    if zone_axis is not None:
        pooled: dict[float, list[str]] = {}
        for rec in records:
            n = rec["cell"].get(zone_axis)
            if n is not None:
                pooled.setdefault(float(n), []).append(rec["status"])
        counts = sorted(pooled)
        phis = [order_parameter(pooled[n]) for n in counts]
        with (analysis_dir / "phi_by_zone_count.csv").open("w", newline="\n") as fh:
            fh.write("zone_count,runs,phi\n")
            for n, phi in zip(counts, phis):
                fh.write(f"{n!r},{len(pooled[n])},{phi!r}\n")
        result["phi_by_zone_count"] = dict(zip(counts, phis))
        try:
            critical = estimate_critical_point(counts, phis)
            result["critical_zone_count"] = critical
            payload: dict[str, Any] = {"critical_zone_count": critical}
        except ValueError as exc:
            result["critical_zone_count"] = None
            payload = {"critical_zone_count": None, "reason": str(exc)}
        (analysis_dir / "critical_point.json").write_text(
            json.dumps(payload, sort_keys=True) + "\n"
        )
    return result
