import logging
from dataclasses import asdict, is_dataclass
from pprint import pformat

import numpy as np

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised when an experiment or geometry configuration is unusable."""


class DomainError(ValueError):
    """Raised when a mathematical precondition of an operation is violated."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def check_shape(name: str, arr: np.ndarray, shape: tuple) -> None:
    if arr.shape != shape:
        raise DomainError(f"{name} has shape {arr.shape}, expected {shape}")


def log_config(cfg, title: str = "config"):
    data = asdict(cfg) if is_dataclass(cfg) else cfg
    logger.debug(f"current {title}: \n{pformat(data)}")
