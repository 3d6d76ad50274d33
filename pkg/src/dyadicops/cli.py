"""Command line entry point: one subcommand per experiment.

Exit status is 0 when every hard invariant holds, 1 on a violation and 2 on
usage or configuration errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .campaigns import EXPERIMENTS, ConfigError, ExperimentConfig, run_experiment
from .dyadic import DomainError

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple[int, ...]:
    """``"3-9"`` or ``"3,5,7"``."""
    try:
        out = []
        for part in text.split(","):
            lo, sep, hi = part.partition("-")
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        return tuple(out)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list like 3-9 or 3,5,7, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, help="tree depth (default 8; 10 for a2-linearity)")
    common.add_argument("--depths", type=_int_list, help="several depths, e.g. 3-9 (overrides --depth where supported)")
    common.add_argument("--trials", type=int, default=10)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--kernel-gen", default="uniform", metavar="{uniform,decay[:C],file:PATH}")
    common.add_argument("--weight-gen", default=None,
                        metavar="{constant[:C],cascade:DELTA,power:ALPHA,lognormal:SIGMA,mixed,file:PATH}")
    common.add_argument("--tol", type=float, default=1e-9, help="relative tolerance of explicit-bound checks")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--allow-unnormalized", action="store_true", help="accept kernels violating the size bound")
    common.add_argument("--alphas", type=_float_list, help="power exponents for a2-linearity")
    common.add_argument("--baseline-depth", type=int, help="rerun at this depth and report growth")
    common.add_argument("--growth-factor", type=float, default=1.5)
    common.add_argument("--top", type=int, default=10, help="instances dumped by counterexample-search")
    common.add_argument("--dump-dir", help="directory for counterexample instance files")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="dyadicops", description="Seeded experiments on perfect dyadic operators.")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    kw = dict(
        experiment=args.experiment,
        depth=args.depth,
        trials=args.trials,
        seed=args.seed,
        kernel_gen=args.kernel_gen,
        weight_gen=args.weight_gen,
        tol=args.tol,
        out=args.out,
        format=args.format,
        allow_unnormalized=args.allow_unnormalized,
        depths=args.depths,
        baseline_depth=args.baseline_depth,
        growth_factor=args.growth_factor,
        top=args.top,
        dump_dir=args.dump_dir,
        jobs=args.jobs,
    )
    if args.alphas:
        kw["alphas"] = args.alphas
    return ExperimentConfig(**kw)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
    except (ConfigError, DomainError) as exc:
        print(f"dyadicops: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run_experiment(config)
    except (DomainError, FileNotFoundError, KeyError) as exc:
        print(f"dyadicops: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = report.render(config.format)
    if config.out:
        Path(config.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    for v in report.violations:
        print(f"violation: {v}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
