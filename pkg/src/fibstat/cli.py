"""Command-line entry point.

Subcommands: fib-audit, transform, density, statconv, membership, korovkin,
rates, full-paper-audit.  Flags override config-file values which override
defaults.  Exit codes: 0 success, 1 configuration error, 2 integrity
violation (an exact identity or operator contract failed).
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .config import ConfigError, resolve_config
from .fibonacci import IntegrityError, InvalidHorizonError

_COMMANDS = {
    "fib-audit": experiments.run_fib_audit,
    "transform": experiments.run_transform,
    "density": experiments.run_density,
    "statconv": experiments.run_statconv,
    "membership": experiments.run_membership,
    "korovkin": experiments.run_korovkin,
    "rates": experiments.run_rates,
    "full-paper-audit": experiments.run_full_audit,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; config errors are 1
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="fibstat",
        description="Fibonacci-difference statistical convergence toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in _COMMANDS:
        p = sub.add_parser(cmd, help=f"run the {cmd} experiment")
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--N", dest="n", type=int, help="sequence horizon")
        p.add_argument("--K", dest="k", type=int, help="operator index horizon")
        p.add_argument("--M", dest="m", type=int, help="grid size (power of two)")
        p.add_argument("--eps", action="append", type=float,
                       help="epsilon grid value (repeatable)")
        p.add_argument("--zero-threshold", dest="zero_threshold", type=float,
                       help="density verdict threshold")
        p.add_argument("--out", help="output directory")
        p.add_argument("--witness", help="witness sequence / oracle set name")
        p.add_argument("--family", help="operator family (fejer, fib-fejer, identity)")
        p.add_argument("--target", action="append",
                       help="approximation target name (repeatable)")
        p.add_argument("--weights", help="rate weight preset")
        p.add_argument("--name", help="experiment name (output subdirectory)")
        p.add_argument("--seed", type=int, help="seed for spot checks")
        plot = p.add_mutually_exclusive_group()
        plot.add_argument("--plots", dest="plots", action="store_true", default=None,
                          help="render figures next to the CSV output (default)")
        plot.add_argument("--no-plots", dest="plots", action="store_false", default=None,
                          help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key)
        for key in ("n", "k", "m", "zero_threshold", "out", "witness",
                    "family", "weights", "name", "seed", "plots")
        if getattr(args, key, None) is not None
    }
    if args.eps:
        overrides["eps"] = tuple(args.eps)
    if args.target:
        overrides["target"] = tuple(args.target)
    overrides.setdefault("name", args.command)
    try:
        cfg = resolve_config(args.config, overrides)
        payload = _COMMANDS[args.command](cfg, name=cfg.name)
    except (ConfigError, InvalidHorizonError, ValueError) as exc:
        print(f"fibstat: configuration error: {exc}", file=sys.stderr)
        return 1
    except IntegrityError as exc:
        print(f"fibstat: integrity violation: {exc}", file=sys.stderr)
        return 2
    summary = payload.get("results", {})
    print(f"{args.command}: wrote {cfg.out}/{cfg.name}/report.json "
          f"(config {cfg.hash()})")
    if args.command == "statconv":
        print(f"  verdict: {summary.get('verdict')}  transform: {summary.get('fib_verdict')}")
    if args.command == "full-paper-audit":
        print(f"  discrepancies: {summary.get('discrepancy_ids')}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
