"""Command line: render the four sweep figures from a results directory."""

from __future__ import annotations

import argparse
import sys

from .reader import SweepFormatError
from .render import FORMATS, render_figures


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bqpt-plots",
        description="Render criterion-vs-K figures from bqpt sweep CSV output.",
    )
    parser.add_argument("--input-dir", required=True, help="directory with the sweep CSVs")
    parser.add_argument("--output-dir", required=True, help="directory for the figures")
    parser.add_argument(
        "--format",
        choices=("svg", "png", "both"),
        default="both",
        help="image format(s) to write (default: both)",
    )
    args = parser.parse_args(argv)
    formats = FORMATS if args.format == "both" else (args.format,)
    try:
        written = render_figures(args.input_dir, args.output_dir, formats)
    except SweepFormatError as exc:
        print(f"invalid sweep output: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
