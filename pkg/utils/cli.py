import os
from argparse import ArgumentParser

from utils import ConfigError
from utils.consts import ALGORITHMS, PRESETS

MAX_SEED = 2 ** 64 - 1


def _add_experiment_args(parser: ArgumentParser):
    parser.add_argument("--config", type=str, default=None, help="JSON experiment config, keys mirror ExperimentConfig.")
    parser.add_argument("--preset", type=str, choices=sorted(PRESETS), default=None,
                        help="start from a shipped parameter set, file values and flags override it.")
    parser.add_argument("--out", type=str, default=None, help="per-trial CSV path, aggregate goes to <stem>.agg.csv next to it")
    parser.add_argument("--seed", type=int, default=None, help="base seed (u64).")
    parser.add_argument("--algo", type=str, choices=ALGORITHMS, action="append", default=None,
                        help="algorithm to run, repeat for several. Default: all.")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for trials.")


def parse_args(do_validation: bool = False, argv: list[str] | None = None):
    parser = ArgumentParser(description="Rate maximisation for SIM-aided holographic MIMO links.")

    # log
    parser.add_argument("-l", "--log", dest="logLevel", choices=[
                        'debug', 'info', 'warning', 'error', 'critical'], default="info", help="Set the logging level")

    commands = parser.add_subparsers(dest="command", required=True)
    run_once = commands.add_parser("run-once", help="one trial of every selected algorithm")
    _add_experiment_args(run_once)
    run_once.add_argument("--trace", type=str, default=None,
                          help="per-iteration trace CSV path, <stem>.<algo>.csv for several algorithms.")
    _add_experiment_args(commands.add_parser("sweep-layers", help="Monte-Carlo sweep over L = K"))
    _add_experiment_args(commands.add_parser("sweep-thickness", help="Monte-Carlo sweep over D_TX = D_RX"))
    commands.add_parser("self-check", help="gradient, factorisation and oracle checks on toy instances")

    args = parser.parse_args(argv)

    if do_validation:
        args_validation(args)

    return args


def args_validation(args) -> bool:
    if args.command == "self-check":
        return True
    if args.config is not None and not os.path.isfile(args.config):
        raise ConfigError(f"config file {args.config} does not exist")
    if args.seed is not None and not 0 <= args.seed <= MAX_SEED:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {args.seed}")
    if args.threads is not None and args.threads < 1:
        raise ConfigError(f"threads must be >= 1, got {args.threads}")
    return True


def overrides_from_args(args) -> dict:
    """Experiment fields set on the command line."""
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.algo:
        overrides["algorithms"] = list(dict.fromkeys(args.algo))
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.out is not None:
        overrides["out"] = args.out
    if getattr(args, "trace", None) is not None:
        overrides["trace"] = args.trace
    return overrides
