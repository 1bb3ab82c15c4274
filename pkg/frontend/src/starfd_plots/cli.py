"""Command line for rendering experiment CSVs.

    starfd-plot --figure 3 --csv figure3_summary.csv --out figure3.png
    starfd-plot --figure 3 --csv ... --out ... --self-test

Exit codes: 0 success, 1 bad arguments, 2 schema mismatch or failed self
test.
"""

import argparse
import sys

from .render import SchemaError, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="starfd-plot", description="Render starfd experiment CSVs to PNG."
    )
    parser.add_argument("--figure", type=int, required=True, choices=(2, 3, 4, 5))
    parser.add_argument("--csv", required=True, help="summary CSV (trace CSV for figure 2)")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument(
        "--self-test",
        action="store_true",
        help="recompute the plotted aggregates independently and compare exactly",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.csv, args.figure, args.out, run_self_test=args.self_test)
    except (SchemaError, AssertionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"figure {args.figure} -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
