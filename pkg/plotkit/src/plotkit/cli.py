"""Command-line entry point for rendering result figures."""

from __future__ import annotations

import argparse
import logging
import sys

from .render import MEASURES, PlotDataError, PlotSpec, plot_measures


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render per-measure strategy-comparison charts from a "
        "simulation results CSV.",
    )
    parser.add_argument("--in", dest="input_csv", required=True,
                        help="results CSV written by the simulation harness")
    parser.add_argument("--out", dest="out_dir", default="figs",
                        help="output directory for images")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    parser.add_argument("--measures", nargs="+", metavar="MEASURE",
                        help=f"subset of: {', '.join(MEASURES)}")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    spec_kwargs = dict(
        input_csv=args.input_csv,
        out_dir=args.out_dir,
        image_format=args.format,
    )
    if args.measures:
        spec_kwargs["measures"] = tuple(args.measures)
    try:
        written = plot_measures(PlotSpec(**spec_kwargs))
    except PlotDataError as exc:
        print(f"plotkit: error: {exc}", file=sys.stderr)
        return 2
    for measure, path in written.items():
        print(f"{measure}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
