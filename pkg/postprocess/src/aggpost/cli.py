"""Command line entry point for the post-processing tools.

Three subcommands map onto the three figures: ``energy`` for the
energy budget of one run, ``contraction`` for the step-size study
across several runs, and ``snapshot`` for rendering a binary phase
snapshot. Malformed input files exit with a distinct status so shell
pipelines can tell bad data from a crash.
"""

import argparse
import pathlib
import sys

from .errors import SeriesSchemaError, SnapshotFormatError
from .plots import plot_contraction, plot_energy, render_snapshot

EXIT_OK = 0
EXIT_DATA = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aggpost",
        description="Plot diagnostics and snapshots written by aggflow runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", help="plot one run's energy budget")
    p.add_argument("series", help="path to a diagnostics series.csv")
    p.add_argument("--out", default="energy.png", help="output image path")
    p.add_argument("--tol", type=float, default=None,
                   help="energy-rise tolerance (default scales with the run)")

    p = sub.add_parser(
        "contraction",
        help="plot mean contraction ratio vs step size over several runs")
    p.add_argument("series", nargs="+",
                   help="two or more series.csv paths from runs that differ "
                        "only in step size")
    p.add_argument("--out", default="contraction.png",
                   help="output image path")

    p = sub.add_parser("snapshot", help="render a scalar phase snapshot")
    p.add_argument("snapshot", help="path to an .aggf snapshot file")
    p.add_argument("--out", default=None,
                   help="output image path (default: snapshot name + .png)")
    p.add_argument("--delta", type=float, default=0.02,
                   help="phase saturation parameter; the interface band is "
                        "contoured at |value| = 1 - delta")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "energy":
            out = plot_energy(args.series, args.out, tol=args.tol)
        elif args.command == "contraction":
            out = plot_contraction(args.series, args.out)
        else:
            out_path = args.out
            if out_path is None:
                out_path = pathlib.Path(args.snapshot).with_suffix(".png")
            out = render_snapshot(args.snapshot, out_path, delta=args.delta)
    except (SeriesSchemaError, SnapshotFormatError) as exc:
        print(f"aggpost: malformed input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        print(f"aggpost: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
