"""Command-line entry point: run, sweep, analyze, validate."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .harness import (
    OUTPUT_ENV_VAR,
    ConfigError,
    analyze,
    load_config_file,
    load_sweep_grid,
    run_experiment,
    run_sweep,
)


def _default_out(explicit: str | None, cfg_dir: str = "") -> Path:
    if explicit:
        return Path(explicit)
    if cfg_dir:
        return Path(cfg_dir)
    return Path(os.environ.get(OUTPUT_ENV_VAR, "out"))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="YAML experiment config")
    parser.add_argument("--out", default=None,
                        help=f"output root (default: config output_dir, then ${OUTPUT_ENV_VAR}, then ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spatialea",
                                     description="Spatially embedded evolutionary algorithm simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one seeded experiment")
    _add_common(run_p)
    run_p.add_argument("--seed", type=int, default=None, help="run seed (default: config base_seed)")

    sweep_p = sub.add_parser("sweep", help="run a seeded parameter grid")
    _add_common(sweep_p)
    sweep_p.add_argument("--grid", required=True, help="YAML grid file (parameter path -> value list)")
    sweep_p.add_argument("--runs", type=int, default=None, help="runs per cell (default: config runs)")
    sweep_p.add_argument("--workers", type=int, default=1)

    analyze_p = sub.add_parser("analyze", help="aggregate outcomes under a results root")
    analyze_p.add_argument("--out", default=None, help="results root to analyze")

    validate_p = sub.add_parser("validate", help="check a config file; exit 0 if valid")
    validate_p.add_argument("--config", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "validate":
        try:
            load_config_file(args.config)
        except (ConfigError, OSError) as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            return 1
        print("ok")
        return 0

    if args.command == "analyze":
        out_root = _default_out(args.out)
        try:
            result = analyze(out_root)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"analyzed {sum(row['runs'] for row in result['cells'])} runs "
              f"in {len(result['cells'])} cells -> {out_root / 'analysis'}")
        if result.get("critical_zone_count") is not None:
            print(f"critical zone count: {result['critical_zone_count']:.3f}")
        return 0

    try:
        cfg = load_config_file(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_root = _default_out(args.out, cfg.output_dir)

    if args.command == "run":
        seed = args.seed if args.seed is not None else cfg.base_seed
        run_dir = out_root / "single" / str(seed)
        outcome = run_experiment(cfg, seed, run_dir)
        print(json.dumps({
            "seed": seed,
            "status": outcome.status,
            "final_generation": outcome.final_generation,
            "final_population": outcome.final_population,
            "best_fitness": outcome.best_fitness,
            "out": str(run_dir),
        }, sort_keys=True))
        return 0

    if args.command == "sweep":
        try:
            spec = load_sweep_grid(Path(args.grid).read_text(), cfg)
        except (ConfigError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        runs = args.runs if args.runs is not None else cfg.runs
        table = run_sweep(spec, runs, cfg.base_seed, args.workers, out_root)
        for cell in table.cells:
            print(f"{cell.name}: extinct={cell.extinct} exploded={cell.exploded} "
                  f"completed={cell.completed} failed={cell.failed}")
        print(f"outcomes -> {out_root / 'outcomes.jsonl'}")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
