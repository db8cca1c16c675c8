#!/usr/bin/env python3
"""Zone-count sweep with energy-based survival, then order-parameter analysis.

Defaults to the desk-scale config and a 5-point zone grid; prints the phi
table and the interpolated critical zone count when the sweep brackets a sign
change.
"""

import argparse
from pathlib import Path

from spatialea.harness import analyze, load_config_file, load_sweep_grid, run_sweep


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default="configs/desk_bistability.yaml")
    parser.add_argument("--zones", type=int, nargs="+",
                        default=[2, 6, 10, 14, 20])
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--out", default="out/phase_sweep")
    args = parser.parse_args()

    root = Path(__file__).resolve().parent.parent
    cfg = load_config_file(root / args.config)
    grid = "grid:\n  parent_selection.zone_count: [" + ", ".join(map(str, args.zones)) + "]\n"
    spec = load_sweep_grid(grid, cfg)

    table = run_sweep(spec, args.runs, cfg.base_seed, args.workers, Path(args.out))
    for cell in table.cells:
        print(f"{cell.name:<16} extinct={cell.extinct:<3} exploded={cell.exploded:<3} "
              f"completed={cell.completed:<3} failed={cell.failed}")

    result = analyze(Path(args.out))
    print("\nphi by zone count:")
    for zones, phi in result.get("phi_by_zone_count", {}).items():
        print(f"  {zones:>5.1f}  {phi:+.3f}")
    critical = result.get("critical_zone_count")
    if critical is not None:
        print(f"\ncritical zone count: {critical:.2f}")
    else:
        print("\nno single sign change in this grid; widen the zone range")


if __name__ == "__main__":
    main()
