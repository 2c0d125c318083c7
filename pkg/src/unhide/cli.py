"""Command-line entry point: ``unhide <command> [--config run.yaml] [flags]``."""

import argparse
import logging
import sys

from . import pipeline
from .config import ConfigError, load_config
from .exceptions import ArtifactError, DataFormatError, DivergenceError

COMMANDS = {
    "ingest": pipeline.ingest,
    "train-mf": pipeline.train_mf,
    "train-mln": pipeline.train_mln,
    "unhide": pipeline.unhide,
    "select": pipeline.select,
    "evaluate": pipeline.evaluate,
    "explain-items": pipeline.explain_items,
    "report": pipeline.report,
}
PIPELINE = ("ingest", "train-mf", "train-mln", "unhide", "select", "evaluate", "explain-items", "report")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--seed", type=int, help="global seed")
    common.add_argument("--feature", choices=("gender", "age"))
    common.add_argument("--method", choices=("deep", "logistic", "entropy", "variance", "pca", "random"))
    group = common.add_mutually_exclusive_group()
    group.add_argument("--n", type=int, help="number of factors to select")
    group.add_argument("--threshold", type=float, help="select factors scoring strictly above this")
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="unhide", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    sub.add_parser("run", parents=[common], help="every stage in order")
    return parser


def overrides_from(args):
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.feature:
        over["feature"] = args.feature
    if args.out:
        over["out"] = args.out
    sel = {}
    if args.method:
        sel["method"] = args.method
    if args.n is not None:
        sel["n"], sel["threshold"] = args.n, None
    if args.threshold is not None:
        sel["threshold"] = args.threshold
    if sel:
        over["select"] = sel
    return over


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, overrides_from(args))
        stages = PIPELINE if args.command == "run" else (args.command,)
        for stage in stages:
            COMMANDS[stage](cfg)
    except (ConfigError, ArtifactError, DataFormatError, DivergenceError, ValueError, IndexError) as exc:
        print(f"unhide {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
