"""Command-line interface.

Subcommands: ``run`` (full campaign), ``ablate`` (transform/annealing
ablation), ``landscape`` (2-D objective slices as CSV), ``validate``
(config schema check).  Exit codes: 0 success, 2 malformed config,
1 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, GuidedBoError
from .harness import resolve_output_dir, run_campaign, write_landscape_csv
from .simulator import landscape_slice

ABLATION_KINDS = ("domain_guided", "transform_only", "annealing_only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guidedbo",
        description="Benchmark transform-guided Bayesian optimization on the "
                    "synthetic split-and-delay alignment testbed.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", help="campaign config file (YAML)")
        p.add_argument("--seed", type=int, default=None,
                       help="override campaign.master_seed")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker pool size (default: available parallelism)")

    p_run = sub.add_parser("run", help="run the configured campaign")
    add_common(p_run)

    p_abl = sub.add_parser(
        "ablate",
        help="run the ablation variants (domain_guided, transform_only, annealing_only)",
    )
    add_common(p_abl)

    p_land = sub.add_parser("landscape", help="export a 2-D objective slice as CSV")
    p_land.add_argument("config")
    p_land.add_argument("--axes", required=True,
                        help="two comma-separated axis indices, e.g. 0,1")
    p_land.add_argument("--grid", type=int, default=101, help="grid nodes per axis")
    p_land.add_argument("--seed", type=int, default=None,
                        help="accepted for interface symmetry; slices are noiseless")

    p_val = sub.add_parser("validate", help="check a config file without running")
    p_val.add_argument("config")
    return parser


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if getattr(args, "jobs", None) is not None:
        cfg = dataclasses.replace(cfg, jobs=args.jobs)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            load_config(args.config)
            print(f"{args.config}: OK")
            return 0

        cfg = _load(args)
        if args.command == "run":
            result = run_campaign(cfg, jobs=args.jobs)
            print(f"campaign complete: {result['output_dir']} "
                  f"({result['wall_time_s']:.1f} s)")
            return 0
        if args.command == "ablate":
            result = run_campaign(cfg, jobs=args.jobs, algorithms=ABLATION_KINDS)
            print(f"ablation complete: {result['output_dir']} "
                  f"({result['wall_time_s']:.1f} s)")
            return 0
        if args.command == "landscape":
            try:
                ax = [int(v) for v in args.axes.split(",")]
            except ValueError:
                raise ConfigError(f"--axes: expected two integers, got {args.axes!r}")
            if len(ax) != 2:
                raise ConfigError(f"--axes: expected two indices, got {args.axes!r}")
            rows = landscape_slice(cfg.simulator, ax[0], ax[1], args.grid)
            out_dir = resolve_output_dir(cfg)
            out_dir.mkdir(parents=True, exist_ok=True)
            path = out_dir / f"landscape_a{ax[0]}_b{ax[1]}_g{args.grid}.csv"
            write_landscape_csv(path, rows)
            print(path)
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GuidedBoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
