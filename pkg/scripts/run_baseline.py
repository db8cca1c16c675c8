#!/usr/bin/env python3
"""Run the two baseline configurations and print a completion table.

Full-length windows take a while; --desk shrinks the simulation windows so
the whole comparison finishes in a couple of minutes.
"""

import argparse
from pathlib import Path

import numpy as np

from spatialea.harness import load_config_file, run_experiment, set_config_value

CONFIGS = {
    "random": "configs/baseline_random.yaml",
    "proximity": "configs/baseline_proximity.yaml",
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--desk", action="store_true",
                        help="shorten simulation windows for a quick desk run")
    parser.add_argument("--out", default=None, help="write logs under this directory")
    args = parser.parse_args()

    root = Path(__file__).resolve().parent.parent
    print(f"{'configuration':<12} {'completed':>10} {'best':>8} {'mean final':>11}")
    for name, rel in CONFIGS.items():
        cfg = load_config_file(root / rel)
        if args.desk:
            cfg = set_config_value(cfg, "kinematics.evaluation_duration", 2.0)
            cfg = set_config_value(cfg, "kinematics.mating_duration", 2.0)
            cfg = set_config_value(cfg, "logging.trajectories", False)
            cfg = set_config_value(cfg, "logging.genotypes", False)
        completed = 0
        best = 0.0
        finals = []
        for r in range(args.runs):
            out_dir = Path(args.out) / name / str(cfg.base_seed + r) if args.out else None
            outcome = run_experiment(cfg, cfg.base_seed + r, out_dir)
            completed += outcome.status == "completed"
            best = max(best, outcome.best_fitness or 0.0)
            finals.append(outcome.records[-1].mean_fitness or 0.0)
        print(f"{name:<12} {completed:>6}/{args.runs:<3} {best:>8.3f} "
              f"{float(np.mean(finals)):>11.3f}")


if __name__ == "__main__":
    main()
