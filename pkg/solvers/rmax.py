"""Rate maximisation by alternating optimisation.

Each outer iteration runs a Riemannian BFGS ascent over the TX phases, then
over the RX phases, then a WMMSE power update warm-started from the previous
power vector.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import *

import numpy as np

from solvers import BaseSolver, IterationRecord, SolutionTrace
from utils import ConfigError
from utils.cascade import (PhaseConfig, PowerVector, Side, achievable_rate, all_partial_cascades,
                           interference_power, stream_terms, tx_cascade, rx_cascade)
from utils.manifold import ManifoldConfig, optimize_phases
from utils.model import LinkProblem
from utils.power import PowerProblem, WmmseConfig, wmmse_power

logger = logging.getLogger(__name__)

LN2 = np.log(2.0)


@dataclass
class RmaxConfig:
    max_outer_iters: int = 50
    rate_tolerance: float = 1e-6
    manifold: ManifoldConfig = field(default_factory=ManifoldConfig)

    def validate(self):
        if self.max_outer_iters < 0:
            raise ConfigError(f"max_outer_iters must be >= 0, got {self.max_outer_iters}")
        if not 0 < self.rate_tolerance < 1:
            raise ConfigError(f"rate_tolerance must lie in (0, 1), got {self.rate_tolerance}")
        m = self.manifold
        if m.max_iters < 0 or m.max_line_search_evals < 1 or m.bfgs_memory < 0:
            raise ConfigError(f"invalid iteration counts in {m}")
        if not 0 < m.gradient_tolerance < 1 or not 0 < m.sufficient_increase < 1:
            raise ConfigError(f"manifold tolerances must lie in (0, 1): {m}")
        if not 0 < m.backtrack_factor < 1 or m.initial_step <= 0:
            raise ConfigError(f"invalid line search parameters in {m}")


def _rate_coefficients(h: np.ndarray, power: PowerVector) -> np.ndarray:
    """c[s, j] = p_j H_sj (1 / total_s - [j != s] / interference_s) / ln 2."""
    total, interference = stream_terms(h, power.p, power.noise)
    weighted = h * power.p[None, :]
    off = weighted / interference[:, None]
    np.fill_diagonal(off, 0.0)
    return (weighted / total[:, None] - off) / LN2


def _layer_gradient(a: np.ndarray, b: np.ndarray, coeff: np.ndarray) -> np.ndarray:
    # H = a diag(theta) b, so dH*_sj / dtheta*_n = conj(a_sn b_nj)
    return np.sum(a.conj().T * (b.conj() @ coeff.T), axis=1)


def euclidean_gradient_tx(problem: LinkProblem, phases: PhaseConfig, power: PowerVector) -> np.ndarray:
    """d f / d theta_tx*, stacked over layers 1..L."""
    omega_tx, omega_rx = problem.props.omega_tx, problem.props.omega_rx
    v_tx = tx_cascade(omega_tx, phases.theta_tx)
    v_rx = rx_cascade(omega_rx, phases.theta_rx)
    left = v_rx @ problem.channel.h_tilde
    coeff = _rate_coefficients(left @ v_tx, power)

    minus, plus = all_partial_cascades(omega_tx, phases.theta_tx, "tx")
    blocks = [_layer_gradient(left @ plus[l], minus[l] @ omega_tx[0], coeff) for l in range(len(omega_tx))]
    return np.concatenate(blocks)


def euclidean_gradient_rx(problem: LinkProblem, phases: PhaseConfig, power: PowerVector) -> np.ndarray:
    """d f / d theta_rx*, stacked over layers 1..K."""
    omega_tx, omega_rx = problem.props.omega_tx, problem.props.omega_rx
    v_tx = tx_cascade(omega_tx, phases.theta_tx)
    v_rx = rx_cascade(omega_rx, phases.theta_rx)
    right = problem.channel.h_tilde @ v_tx
    coeff = _rate_coefficients(v_rx @ right, power)

    minus, plus = all_partial_cascades(omega_rx, phases.theta_rx, "rx")
    blocks = [_layer_gradient(omega_rx[0] @ minus[k], plus[k] @ right, coeff) for k in range(len(omega_rx))]
    return np.concatenate(blocks)


GRADIENTS = {"tx": euclidean_gradient_tx, "rx": euclidean_gradient_rx}


def side_problem(problem: LinkProblem, phases: PhaseConfig, power: PowerVector,
                 side: Side) -> tuple[Callable, Callable]:
    """Rate and its gradient as functions of one side's phases, the rest held fixed."""
    grad_fn = GRADIENTS[side]

    def objective(theta: np.ndarray) -> float:
        return problem.rate(phases.replace(side, theta), power)

    def gradient(theta: np.ndarray) -> np.ndarray:
        return grad_fn(problem, phases.replace(side, theta), power)

    return objective, gradient


def run_rmax(problem: LinkProblem, init: PhaseConfig, p0: np.ndarray | None = None,
             cfg: RmaxConfig = None, wmmse_cfg: WmmseConfig = None,
             algorithm: str = "rmax-random") -> SolutionTrace:
    cfg = cfg or RmaxConfig()
    cfg.validate()
    init.validate()
    power = problem.equal_power()
    if p0 is not None:
        power = power.with_p(np.asarray(p0, dtype=float))
    power.validate()

    start = time.perf_counter()
    phases = init
    h = problem.effective(phases).h
    rate = achievable_rate(h, power)
    records = [IterationRecord(iter=0, rate=rate, g=interference_power(h))]
    step_rates = [rate]
    failures = 0

    outer = 0
    for outer in range(1, cfg.max_outer_iters + 1):
        grad_norms = {}
        for side in ("tx", "rx"):
            objective, gradient = side_problem(problem, phases, power, side)
            result = optimize_phases(objective, gradient, phases.get(side), cfg.manifold, side)
            phases = phases.replace(side, result.theta)
            grad_norms[side] = result.grad_norm
            failures += int(result.line_search_failed)
            step_rates.append(result.value)

        h = problem.effective(phases).h
        power = wmmse_power(PowerProblem(h=h, total=problem.total_power, noise=problem.noise),
                            power.p, wmmse_cfg)
        new_rate = achievable_rate(h, power)
        step_rates.append(new_rate)
        records.append(IterationRecord(
            iter=outer, rate=new_rate, grad_norm_tx=grad_norms["tx"], grad_norm_rx=grad_norms["rx"],
            g=interference_power(h), wall_ms=1000 * (time.perf_counter() - start)))
        logger.debug(f"[{algorithm}] outer {outer}: rate {new_rate:.6f}, "
                     f"|grad| tx {grad_norms['tx']:.3e} rx {grad_norms['rx']:.3e}")

        improvement = (new_rate - rate) / max(abs(rate), np.finfo(float).tiny)
        rate = new_rate
        if improvement < cfg.rate_tolerance:
            break

    if failures:
        logger.debug(f"[{algorithm}] {failures} line searches ended without an accepted step")

    h = problem.effective(phases).h
    trace = SolutionTrace(
        algorithm=algorithm, phases=phases, power=power, rate=achievable_rate(h, power),
        interference=interference_power(h), outer_iters=outer, records=records,
        wall_ms=1000 * (time.perf_counter() - start), line_search_failures=failures, step_rates=step_rates)
    logger.info(f"[{algorithm}] rate {trace.rate:.4f} bps/Hz after {outer} outer iterations "
                f"({trace.wall_ms / 1000:.2f}s)")
    return trace


class RmaxSolver(BaseSolver):
    name = "rmax-random"

    def __init__(self, cfg: RmaxConfig = None, wmmse_cfg: WmmseConfig = None):
        self.cfg = cfg or RmaxConfig()
        self.wmmse_cfg = wmmse_cfg or WmmseConfig()

    def solve(self, problem: LinkProblem, init: PhaseConfig) -> SolutionTrace:
        return run_rmax(problem, init, None, self.cfg, self.wmmse_cfg, algorithm=self.name)
