import logging
from dataclasses import dataclass, field
from typing import *

from pydantic import BaseModel

from utils import ConfigError
from utils.cascade import PhaseConfig, PowerVector
from utils.model import LinkProblem

logger = logging.getLogger(__name__)


class IterationRecord(BaseModel):
    iter: int
    rate: float
    grad_norm_tx: float = 0.0
    grad_norm_rx: float = 0.0
    g: float = 0.0
    wall_ms: float = 0.0


@dataclass
class SolutionTrace:
    algorithm: str
    phases: PhaseConfig
    power: PowerVector
    rate: float
    interference: float
    outer_iters: int
    records: list[IterationRecord] = field(default_factory=list)
    wall_ms: float = 0.0
    line_search_failures: int = 0
    # rate after every alternating step (tx, rx, power) of each outer iteration
    step_rates: list[float] = field(default_factory=list)
    # per coordinate update, only filled when tracking is requested
    update_g: list[float] | None = None
    # the IMin stage of a hybrid run
    stage: Optional["SolutionTrace"] = None

    def show(self) -> str:
        return (f"{self.algorithm}: rate={self.rate:.4f} bps/Hz, interference={self.interference:.4e}, "
                f"iters={self.outer_iters}, {self.wall_ms:.1f} ms")


class BaseSolver:
    name: str = ""

    def solve(self, problem: LinkProblem, init: PhaseConfig) -> SolutionTrace:
        raise NotImplementedError


def get_solver(name: str, rmax_cfg=None, imin_cfg=None, wmmse_cfg=None) -> BaseSolver:
    from solvers.hybrid import HybridSolver
    from solvers.imin import IminSolver
    from solvers.rmax import RmaxSolver

    if name == "rmax-random":
        return RmaxSolver(rmax_cfg, wmmse_cfg)
    if name == "imin":
        return IminSolver(imin_cfg)
    if name == "hybrid":
        return HybridSolver(imin_cfg, rmax_cfg, wmmse_cfg)
    raise ConfigError(f"unknown algorithm {name}")
