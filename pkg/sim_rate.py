import logging
import sys

import coloredlogs

import utils.cli
from harness import selfcheck, sweeps, writers
from harness.config import load_config
from utils import ConfigError, state

logger = logging.getLogger(__name__)


def main(args) -> int:
    if args.command == "self-check":
        report = selfcheck.self_check()
        print(report.show())
        return 0 if report.passed else 1

    try:
        cfg = load_config(args.config, args.preset, utils.cli.overrides_from_args(args))
        state.init_pool(cfg.threads)
        if args.command == "run-once":
            result, solutions = sweeps.run_once(cfg)
            if cfg.trace:
                writers.write_traces(solutions, cfg.trace)
        else:
            if cfg.trace:
                logger.warning(f"trace {cfg.trace} from the config is only written by run-once, ignoring it")
            if args.command == "sweep-layers":
                result = sweeps.sweep_layers(cfg)
            else:
                result = sweeps.sweep_thickness(cfg)
    except ConfigError as e:
        logger.error(f"configuration error: {e}")
        return 2
    finally:
        state.shutdown_pool()

    if cfg.out:
        writers.write_sweep(result, cfg.out)
    else:
        for row in result.aggregate():
            print(f"{row.axis_value:g}\t{row.algo}\t{row.mean_rate:.6f}\t{row.std_rate:.6f}\t{row.n}")
    return 0


if __name__ == "__main__":
    try:
        args = utils.cli.parse_args(do_validation=True)
    except ConfigError as e:
        logging.getLogger(__name__).error(f"configuration error: {e}")
        sys.exit(2)
    coloredlogs.install(level=args.logLevel.upper())
    sys.exit(main(args))
