"""CLI: `plots <kind> --in DIR --out PATH [filters]`."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import METRICS, plot_curves, plot_heatmap, plot_histogram, plot_scatter, plot_trajectory
from .io import MalformedInput


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots",
                                     description="Render figures from spatial-EA run logs")
    sub = parser.add_subparsers(dest="kind", required=True)

    def common(p: argparse.ArgumentParser, run_level: bool = False) -> None:
        p.add_argument("--in", dest="in_dir", required=True,
                       help="run directory" if run_level else "results root")
        p.add_argument("--out", required=True, help="output image path")

    heat = sub.add_parser("heatmap", help="annotated metric grid over two swept parameters")
    common(heat)
    heat.add_argument("--x", required=True, help="parameter path on the x axis")
    heat.add_argument("--y", required=True, help="parameter path on the y axis")
    heat.add_argument("--metric", default="mean_final_population", choices=METRICS)
    heat.add_argument("--cell", default=None, help="restrict to cells whose name contains this")

    traj = sub.add_parser("trajectory", help="per-agent paths for one generation")
    common(traj, run_level=True)
    traj.add_argument("--gen", type=int, required=True)
    traj.add_argument("--world", type=float, nargs=2, default=(25.0, 25.0),
                      metavar=("W", "H"))

    for kind, helptext in (("curves", "aggregate population/fitness curves"),
                           ("histogram", "final population distribution"),
                           ("scatter", "final population vs best fitness")):
        p = sub.add_parser(kind, help=helptext)
        common(p)
        p.add_argument("--cell", default=None, help="restrict to cells whose name contains this")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "heatmap":
            out = plot_heatmap(args.in_dir, args.x, args.y, args.metric, args.out,
                               cell_filter=args.cell)
        elif args.kind == "trajectory":
            out = plot_trajectory(args.in_dir, args.gen, args.out, world=tuple(args.world))
        elif args.kind == "curves":
            out = plot_curves(args.in_dir, args.out, cell_filter=args.cell)
        elif args.kind == "histogram":
            out = plot_histogram(args.in_dir, args.out, cell_filter=args.cell)
        else:
            out = plot_scatter(args.in_dir, args.out, cell_filter=args.cell)
    except (ValueError, FileNotFoundError, MalformedInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
