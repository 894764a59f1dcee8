import json
import math
import logging
from copy import deepcopy
from dataclasses import asdict, dataclass, field, replace
from typing import *

from dacite import Config, DaciteError, from_dict

from solvers.imin import IminConfig
from solvers.rmax import RmaxConfig
from utils import ConfigError, log_config
from utils.consts import ALGORITHMS, PRESETS, SWEEP_AXES
from utils.model import SimModelConfig
from utils.power import WmmseConfig

logger = logging.getLogger(__name__)

# JSON numbers such as 20 land in float fields
DACITE_STRICT = Config(strict=True, type_hooks={float: float})
DACITE_LOOSE = Config(type_hooks={float: float})


@dataclass
class ExperimentConfig(SimModelConfig):
    trials: int = 20
    seed: int = 0
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    threads: int = 1
    axis: str = "layers"
    axis_values: list[float] = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    record_wall_time: bool = False
    out: str | None = None
    trace: str | None = None

    rmax: RmaxConfig = field(default_factory=RmaxConfig)
    imin: IminConfig = field(default_factory=IminConfig)
    wmmse: WmmseConfig = field(default_factory=WmmseConfig)

    def validate(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not self.algorithms or any(a not in ALGORITHMS for a in self.algorithms):
            raise ConfigError(f"algorithms must be a non-empty subset of {ALGORITHMS}, got {self.algorithms}")
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"axis must be one of {SWEEP_AXES}, got {self.axis}")
        if not self.axis_values or any(v <= 0 for v in self.axis_values):
            raise ConfigError(f"axis values must be positive, got {self.axis_values}")
        if self.axis == "layers" and any(float(v) != int(v) for v in self.axis_values):
            raise ConfigError(f"layer counts must be integers, got {self.axis_values}")
        for name in ("tx_power_dbm", "noise_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        self.rmax.validate()
        self.imin.validate()

    def model_config(self, axis: str | None = None, value: float | None = None) -> SimModelConfig:
        """The physical configuration, with the sweep axis set to `value`."""
        cfg = from_dict(data_class=SimModelConfig, data=asdict(self), config=DACITE_LOOSE)
        if axis == "layers":
            if float(value) != int(value) or int(value) < 1:
                raise ConfigError(f"layer count must be a positive integer, got {value}")
            cfg = replace(cfg, tx_layers=int(value), rx_layers=int(value))
        elif axis == "thickness":
            cfg = replace(cfg, tx_thickness=float(value), rx_thickness=float(value))
        return cfg


def config_from_dict(data: dict) -> ExperimentConfig:
    try:
        cfg = from_dict(data_class=ExperimentConfig, data=data, config=DACITE_STRICT)
    except DaciteError as e:
        raise ConfigError(f"invalid experiment config: {e}") from e
    cfg.validate()
    return cfg


def load_config(path: str | None = None, preset: str | None = None,
                overrides: dict | None = None) -> ExperimentConfig:
    """Preset, then file, then command line overrides."""
    data = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset}, choose from {sorted(PRESETS)}")
        data.update(deepcopy(PRESETS[preset]))
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        data.update(loaded)
    data.update(overrides or {})

    cfg = config_from_dict(data)
    log_config(cfg, "experiment config")
    return cfg
