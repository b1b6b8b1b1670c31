"""Batch plotting command: `plot <kind> --in results.csv --out figure.svg`."""

from __future__ import annotations

import argparse
import sys

from .series import PLOT_KINDS, PlotJob, SchemaError
from .render import render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render sweep result CSVs as figures (SVG by default).",
    )
    parser.add_argument("kind", choices=PLOT_KINDS, help="which figure to draw")
    parser.add_argument("--in", dest="csv_path", required=True, help="input results CSV")
    parser.add_argument("--out", dest="out_path", required=True, help="output image path")
    parser.add_argument("--nominal", type=float, default=0.8, help="nominal coverage line")
    parser.add_argument(
        "--dump-series",
        dest="dump_path",
        help="also write the plotted numbers as deterministic text",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = PlotJob(
            csv_path=args.csv_path,
            kind=args.kind,
            out_path=args.out_path,
            nominal=args.nominal,
            dump_path=args.dump_path,
        )
        series = render(job)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out_path} ({len(series)} series)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
