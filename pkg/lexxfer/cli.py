"""
lexxfer command line: corpus similarity and sarcasm-to-hate transfer experiments.
"""

import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace

from lexxfer import constants as const
from lexxfer.config import RunConfig
from lexxfer.constants import Experiment
from lexxfer.errors import ConfigError, IngestError, LexXferError
from lexxfer.runner import RUNNERS

logger = logging.getLogger(__name__)

VERB_EXPERIMENTS = {
    "similarity": Experiment.SIMILARITY,
    "single-step": Experiment.SINGLE_STEP,
    "sequential": Experiment.SEQUENTIAL,
    "ablation": Experiment.ABLATION,
}
VERB_VALIDATE = "validate"


def _seed(value: str) -> int:
    try:
        seed = int(value)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"Not an integer: {value}") from err
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"Seed must be an unsigned 64-bit integer: {value}")
    return seed


def _threads(value: str) -> int:
    try:
        threads = int(value)
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"Not an integer: {value}") from err
    if threads < 1:
        raise argparse.ArgumentTypeError(f"Threads must be >= 1: {value}")
    return threads


def _create_parser():
    """
    Parse command line arguments.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        required=True,
        help="Path to the JSON run config.",
    )
    common.add_argument(
        "--out",
        default=None,
        help="Output directory; overrides the config's output_dir.",
    )
    common.add_argument(
        "--seed",
        type=_seed,
        default=None,
        help="Global seed; overrides the config's seed.",
    )
    common.add_argument(
        "--threads",
        type=_threads,
        default=1,
        help="Worker threads for the bootstrap iterations of a similarity run.",
    )
    common.add_argument(
        "--verbose",
        action="store_true",
        default=False,
        help="Log debug messages, including each skipped dataset row.",
    )
    parser = argparse.ArgumentParser(
        prog="lexxfer",
        description="Lexical relatedness and sarcasm pre-training experiments.",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)
    verbs.add_parser(
        "similarity", parents=[common], help="Bootstrap Jaccard / JSD between corpora."
    )
    verbs.add_parser(
        "single-step",
        parents=[common],
        help="Train on sarcasm labels, evaluate the same test set as hate.",
    )
    verbs.add_parser(
        "sequential",
        parents=[common],
        help="Sarcasm, then implicit hate, then ETHOS, carrying weights forward.",
    )
    verbs.add_parser(
        "ablation",
        parents=[common],
        help="Sequential training with and without sarcasm pre-training.",
    )
    verbs.add_parser(
        VERB_VALIDATE, parents=[common], help="Check the config without reading datasets."
    )
    return parser


def _configure_logging(verbose: bool):
    level = logging.DEBUG if verbose else logging.INFO
    package_logger = logging.getLogger("lexxfer")
    if not any(isinstance(h, logging.StreamHandler) for h in package_logger.handlers):
        package_logger.addHandler(logging.StreamHandler())
    package_logger.setLevel(level)


def _load_config(args) -> RunConfig:
    config = RunConfig.from_file(args.config, seed=args.seed, output_dir=args.out)
    if args.verb in VERB_EXPERIMENTS:
        experiment = VERB_EXPERIMENTS[args.verb]
        if config.experiment is not experiment:
            logger.info(
                "Running %s; the config names %s.",
                experiment.value,
                config.experiment.value,
            )
            config = replace(config, experiment=experiment)
    return config


def main_cli(argv: Sequence[str] | None = None) -> int:
    parser = _create_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = _load_config(args)
        if args.verb == VERB_VALIDATE:
            warnings = config.validate()
        else:
            warnings = RUNNERS[config.experiment](config, threads=args.threads).warnings
    except ConfigError:
        logger.exception("Config error.")
        return const.EXIT_CONFIG
    except IngestError:
        logger.exception("Ingest error.")
        return const.EXIT_INGEST
    except (LexXferError, ValueError, OSError):
        logger.exception("Runtime error.")
        return const.EXIT_RUNTIME
    if len(warnings) > 0:
        logger.warning("Warnings:")
    for w in warnings:
        logger.warning(w)
    if args.verb == VERB_VALIDATE:
        logger.info("Config is valid: %s", args.config)
    else:
        logger.info("%s complete!", config.experiment.value)
    return const.EXIT_OK


if __name__ == "__main__":
    sys.exit(main_cli())
