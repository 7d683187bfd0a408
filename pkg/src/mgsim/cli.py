"""Command-line entry point: ``mgsim generate`` and ``mgsim bench``.

Exit status is 0 on success, 2 for configuration errors and 1 for runtime
failures.
"""
from __future__ import annotations

import argparse
import sys

from .bench import FORMATS, KNOWN_CONTROLLERS, BenchmarkConfig, render_report, run_benchmark
from .errors import ConfigError, DomainError, MicrogridError
from .generate import PRESET_SIZES, build_scenario_set

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
PRESET_CHOICES = tuple(PRESET_SIZES) + ("random",)


def _horizon(text: str):
    if text == "full":
        return None
    try:
        h = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("horizon must be a positive integer or 'full'")
    if h < 1:
        raise argparse.ArgumentTypeError("horizon must be a positive integer or 'full'")
    return h


def _controllers(text: str):
    return tuple(c.strip() for c in text.split(",") if c.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mgsim", description="Microgrid dispatch benchmark.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a scenario set and write it as JSON")
    g.add_argument("--preset", default="pymgrid25", choices=PRESET_CHOICES)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=None, help="microgrid count (random preset only)")
    g.add_argument("--scenario-out", required=True)

    b = sub.add_parser("bench", help="train and evaluate controllers, then write a cost report")
    src = b.add_mutually_exclusive_group()
    src.add_argument("--scenario-in", default=None, help="scenario JSON written by 'generate'")
    src.add_argument("--preset", default="pymgrid25", choices=PRESET_CHOICES)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--count", type=int, default=None)
    b.add_argument("--controllers", type=_controllers, default=KNOWN_CONTROLLERS,
                   help="comma-separated subset of " + ",".join(KNOWN_CONTROLLERS))
    b.add_argument("--horizon", type=_horizon, default=24, help="MPC horizon in steps, or 'full'")
    b.add_argument("--train-frac", type=float, default=0.67)
    b.add_argument("--episodes", type=int, default=2000)
    b.add_argument("--alpha", type=float, default=0.1)
    b.add_argument("--gamma", type=float, default=0.95)
    b.add_argument("--days", type=int, default=None, help="truncate every series to this many days")
    b.add_argument("--jobs", type=int, default=1, help="worker processes (one microgrid per task)")
    b.add_argument("--out", default=None, help="report path (default: stdout)")
    b.add_argument("--format", default="csv", choices=FORMATS)
    b.add_argument("--dump-lp", type=int, default=None, metavar="STEP",
                   help="write the MPC program built at this test-phase step")
    b.add_argument("--dump-dir", default=".")
    return p


def _write(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_generate(args) -> int:
    ss = build_scenario_set(args.preset, args.count, args.seed)
    ss.save(args.scenario_out)
    print(f"wrote {len(ss.microgrids)} microgrids to {args.scenario_out}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = BenchmarkConfig(
        preset=args.preset, seed=args.seed, count=args.count, controllers=args.controllers,
        horizon=args.horizon, train_frac=args.train_frac, episodes=args.episodes, alpha=args.alpha,
        gamma=args.gamma, days=args.days, jobs=args.jobs, scenario_in=args.scenario_in,
        dump_lp=args.dump_lp, dump_dir=args.dump_dir,
    )
    cfg.validate()
    reports = run_benchmark(cfg)
    _write(render_report(reports, args.format), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return cmd_generate(args) if args.command == "generate" else cmd_bench(args)
    except (ConfigError, DomainError) as exc:
        print(f"mgsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, MicrogridError, RuntimeError, ValueError) as exc:
        print(f"mgsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
