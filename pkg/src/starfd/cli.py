"""Command-line interface.

Subcommands:
  run       one experiment config (JSON) -> summary/trace CSVs
  figure    built-in desk-scale configs for the four study figures
  validate  the full acceptance suite (or a subset)

Exit codes: 0 success, 1 config error, 2 unexpected infeasible runs,
3 validation failure.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict

from .experiments import (
    ConfigError,
    load_config,
    run_experiment,
    summary_rows,
    trace_rows,
    write_csv,
)
from .presets import FIGURE_IDS, default_seed_count, figure_config, figure_schemes


def _add_workers(p):
    p.add_argument(
        "--workers",
        type=int,
        default=min(4, os.cpu_count() or 1),
        help="parallel worker processes (results are order-independent)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="starfd",
        description=(
            "Transmit-power minimization for a STAR-RIS assisted full-duplex "
            "link: experiments, benchmark schemes and validation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True, help="JSON config file")
    p_run.add_argument("--out", required=True, help="output directory")
    _add_workers(p_run)

    p_fig = sub.add_parser("figure", help="run a built-in desk-scale figure config")
    p_fig.add_argument("--id", type=int, required=True, choices=FIGURE_IDS)
    p_fig.add_argument("--seeds", type=int, default=None, help="seed count")
    p_fig.add_argument("--out", required=True, help="output directory")
    _add_workers(p_fig)

    p_val = sub.add_parser("validate", help="run the acceptance suite")
    p_val.add_argument(
        "--only",
        default=None,
        help="comma-separated criterion ids (default: all)",
    )
    _add_workers(p_val)
    return parser


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, OSError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)
    results, failed = run_experiment(config, workers=args.workers)
    write_csv(os.path.join(args.out, "summary.csv"), summary_rows(results))
    if config.emit_trace:
        write_csv(os.path.join(args.out, "trace.csv"), trace_rows(results))
    print(f"{len(results)} runs -> {args.out} ({len(failed)} infeasible)")
    return 2 if failed else 0


def _cmd_figure(args) -> int:
    seeds = args.seeds if args.seeds is not None else default_seed_count(args.id)
    os.makedirs(args.out, exist_ok=True)
    all_results = []
    any_failed = False
    configs = {}
    for scheme in figure_schemes(args.id):
        config = figure_config(args.id, scheme, seeds)
        configs[scheme] = config
        results, failed = run_experiment(config, workers=args.workers)
        all_results.extend(results)
        any_failed = any_failed or bool(failed)
    write_csv(os.path.join(args.out, f"figure{args.id}_summary.csv"), summary_rows(all_results))
    if args.id == 2:
        write_csv(os.path.join(args.out, f"figure{args.id}_trace.csv"), trace_rows(all_results))
    with open(os.path.join(args.out, f"figure{args.id}_config.json"), "w") as fh:
        json.dump({s: asdict(c) for s, c in configs.items()}, fh, indent=1, default=list)
    print(f"figure {args.id}: {len(all_results)} runs -> {args.out}")
    return 2 if any_failed else 0


def _cmd_validate(args) -> int:
    from .validation import run_criteria

    ids = None
    if args.only:
        try:
            ids = {int(x) for x in args.only.split(",")}
        except ValueError:
            print(f"config error: --only expects integer ids, got {args.only!r}", file=sys.stderr)
            return 1
    results = run_criteria(ids, workers=args.workers)
    failed = 0
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"[{mark}] criterion {r.cid:2d} ({r.seconds:6.1f}s) {r.name}: {r.detail}")
        failed += 0 if r.passed else 1
    if failed:
        print(f"{failed} criterion(s) failed", file=sys.stderr)
        return 3
    print(f"all {len(results)} criteria passed")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "figure":
        return _cmd_figure(args)
    return _cmd_validate(args)


if __name__ == "__main__":
    sys.exit(main())
