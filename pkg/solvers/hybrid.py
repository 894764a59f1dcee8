import logging
import time

from solvers import BaseSolver, SolutionTrace
from solvers.imin import IminConfig, run_imin
from solvers.rmax import RmaxConfig, run_rmax
from utils.cascade import PhaseConfig
from utils.model import LinkProblem
from utils.power import WmmseConfig

logger = logging.getLogger(__name__)


def run_hybrid(problem: LinkProblem, init: PhaseConfig, imin_cfg: IminConfig = None,
               rmax_cfg: RmaxConfig = None, wmmse_cfg: WmmseConfig = None,
               stage: SolutionTrace | None = None) -> SolutionTrace:
    """IMin from `init`, then rate maximisation started at its phases and water-filling power.

    A precomputed IMin result for the same problem and init can be passed as `stage`.
    """
    if stage is None:
        stage = run_imin(problem, init, imin_cfg)
    start = time.perf_counter()
    refined = run_rmax(problem, stage.phases, stage.power.p, rmax_cfg, wmmse_cfg, algorithm="hybrid")
    refined.stage = stage
    refined.outer_iters += stage.outer_iters
    refined.wall_ms = stage.wall_ms + 1000 * (time.perf_counter() - start)
    logger.debug(f"[hybrid] imin stage {stage.rate:.4f} -> {refined.rate:.4f} bps/Hz")
    return refined


class HybridSolver(BaseSolver):
    name = "hybrid"

    def __init__(self, imin_cfg: IminConfig = None, rmax_cfg: RmaxConfig = None, wmmse_cfg: WmmseConfig = None):
        self.imin_cfg = imin_cfg or IminConfig()
        self.rmax_cfg = rmax_cfg or RmaxConfig()
        self.wmmse_cfg = wmmse_cfg or WmmseConfig()

    def solve(self, problem: LinkProblem, init: PhaseConfig, stage: SolutionTrace | None = None) -> SolutionTrace:
        return run_hybrid(problem, init, self.imin_cfg, self.rmax_cfg, self.wmmse_cfg, stage)
