"""Command-line entry point: ``fdsic run <scenario> [options]``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import SICError
from .harness import bundled_scenario, load_config, run_scenario, write_outputs


def build_parser():
    parser = argparse.ArgumentParser(prog="fdsic", description="Digital self-interference cancellation workbench.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario and write traces and a summary")
    run.add_argument("scenario", help="scenario file, or the name of a bundled scenario (reference, wh_extension)")
    run.add_argument("--out", default="out", help="output directory (default: ./out)")
    run.add_argument("--algos", help="comma-separated subset of algorithms to run")
    run.add_argument("--seed-override", type=int, metavar="N", help="use seeds N, N+1, N+2, N+3")
    run.add_argument("--epoch-scale", type=float, metavar="F", help="multiply network training epochs by F")
    run.add_argument("-v", "--verbose", action="store_true", help="log progress and the resolved scenario")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        path = args.scenario if os.path.exists(args.scenario) else bundled_scenario(args.scenario)
        cfg = load_config(path)
        algos = [a.strip() for a in args.algos.split(",") if a.strip()] if args.algos else None
        cfg = cfg.with_overrides(args.seed_override, args.epoch_scale, algos)
        result = run_scenario(cfg)
        write_outputs(result.traces, result.summaries, args.out, stdout=sys.stdout)
    except SICError as err:
        print(f"fdsic: error: {err}", file=sys.stderr)
        return 2
    faults = [t.algorithm for t in result.traces.values() if t.fault]
    if faults:
        print(f"fdsic: numeric fault in {', '.join(faults)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
