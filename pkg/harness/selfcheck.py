"""Numerical checks on seeded toy instances.

Each check reports the largest relative error it saw; the report passes when
every check stays below its tolerance.
"""
import logging
import math
import time
from typing import *

import numpy as np
from pydantic import BaseModel

from solvers import rmax
from solvers.imin import InterferenceBasis, update_meta_atom
from utils.cascade import (PhaseConfig, PowerVector, achievable_rate, all_partial_cascades, phase_blocks,
                           rx_cascade, tx_cascade)
from utils.channel import make_rng
from utils.consts import SelfCheckCase, get_self_check_cases
from utils.model import LinkProblem, SimModel, SimModelConfig
from utils.power import PowerProblem, WmmseConfig, waterfill_power, wmmse_power

logger = logging.getLogger(__name__)

FD_STEP = 1e-6
GRID_POINTS = 3600


class CheckResult(BaseModel):
    name: str
    max_rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def show(self) -> str:
        status = "ok" if self.passed else "FAILED"
        return f"{self.name:<28} max rel error {self.max_rel_error:.3e} (tol {self.tolerance:.0e}) {status}"


class SelfCheckReport(BaseModel):
    checks: list[CheckResult] = []

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def show(self) -> str:
        lines = [c.show() for c in self.checks]
        lines.append("all checks passed" if self.passed else "self-check FAILED")
        return "\n".join(lines)


def _grid(count: int) -> list[int]:
    rows = max(r for r in range(1, math.isqrt(count) + 1) if count % r == 0)
    return [rows, count // rows]


def toy_problem(num_streams: int, atoms: int, layers: int, seed: int) -> tuple[LinkProblem, PhaseConfig, PowerVector]:
    """Small link with random phases and a random feasible power split."""
    cfg = SimModelConfig(num_streams=num_streams, tx_atoms=atoms, rx_atoms=atoms, tx_layers=layers,
                         rx_layers=layers, tx_grid=_grid(atoms), rx_grid=_grid(atoms))
    model = SimModel(cfg)
    problem = model.sample_problem(seed)
    rng = make_rng(seed + 1)
    phases = PhaseConfig.random(rng, problem.tx_size, problem.rx_size)
    split = rng.uniform(0.5, 1.5, num_streams)
    power = problem.equal_power().with_p(problem.total_power * split / split.sum())
    return problem, phases, power


def finite_difference_gradient(objective: Callable[[np.ndarray], float], theta: np.ndarray,
                               step: float = FD_STEP) -> np.ndarray:
    """Central differences, returned in the d / d theta* convention."""
    grad = np.zeros(theta.size, dtype=complex)
    for n in range(theta.size):
        e = np.zeros(theta.size, dtype=complex)
        e[n] = step
        d_re = (objective(theta + e) - objective(theta - e)) / (2 * step)
        d_im = (objective(theta + 1j * e) - objective(theta - 1j * e)) / (2 * step)
        grad[n] = (d_re + 1j * d_im) / 2
    return grad


def gradient_error(problem: LinkProblem, phases: PhaseConfig, power: PowerVector, side: str) -> float:
    objective, gradient = rmax.side_problem(problem, phases, power, side)
    theta = phases.get(side)
    analytic = gradient(theta)
    numeric = finite_difference_gradient(objective, theta)
    scale = max(float(np.max(np.abs(numeric))), np.finfo(float).tiny)
    return float(np.max(np.abs(analytic - numeric))) / scale


def check_gradients(cases: list[SelfCheckCase] | None = None) -> CheckResult:
    cases = cases or get_self_check_cases()
    worst = 0.0
    for case in cases:
        problem, phases, power = toy_problem(case.num_streams, case.atoms, case.layers, case.seed)
        for side in ("tx", "rx"):
            err = gradient_error(problem, phases, power, side)
            logger.debug(f"{case.name} {side}: gradient rel error {err:.3e}")
            worst = max(worst, err)
    return CheckResult(name="euclidean gradient", max_rel_error=worst,
                       tolerance=min(c.tolerance for c in cases))


def check_factorization(seed: int = 21) -> CheckResult:
    problem, phases, _ = toy_problem(2, 9, 3, seed)
    worst = 0.0
    omega_tx, omega_rx = problem.props.omega_tx, problem.props.omega_rx
    v_tx = tx_cascade(omega_tx, phases.theta_tx)
    v_rx = rx_cascade(omega_rx, phases.theta_rx)

    minus, plus = all_partial_cascades(omega_tx, phases.theta_tx, "tx")
    blocks = phase_blocks(phases.theta_tx, len(omega_tx))
    for l in range(len(omega_tx)):
        rebuilt = plus[l] @ (blocks[l][:, None] * (minus[l] @ omega_tx[0]))
        worst = max(worst, np.linalg.norm(rebuilt - v_tx) / np.linalg.norm(v_tx))

    minus, plus = all_partial_cascades(omega_rx, phases.theta_rx, "rx")
    blocks = phase_blocks(phases.theta_rx, len(omega_rx))
    for k in range(len(omega_rx)):
        rebuilt = (omega_rx[0] @ minus[k]) @ (blocks[k][:, None] * plus[k])
        worst = max(worst, np.linalg.norm(rebuilt - v_rx) / np.linalg.norm(v_rx))
    return CheckResult(name="cascade factorization", max_rel_error=float(worst), tolerance=1e-10)


def check_coordinate_update(cases: int = 200, seed: int = 31) -> CheckResult:
    """Closed-form phase against a dense phase grid on random bases."""
    rng = make_rng(seed)
    grid = np.exp(2j * np.pi * np.arange(GRID_POINTS) / GRID_POINTS)
    worst = 0.0
    for _ in range(cases):
        rows, atoms = 6, int(rng.integers(2, 9))
        columns = rng.standard_normal((rows, atoms)) + 1j * rng.standard_normal((rows, atoms))
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, atoms))
        basis = InterferenceBasis(columns=columns, theta=theta.copy(), partial=columns @ theta)
        n = int(rng.integers(atoms))

        rest = basis.partial - columns[:, n] * theta[n]
        best_grid = float(np.min(np.sum(np.abs(rest[:, None] + columns[:, n][:, None] * grid[None, :]) ** 2, axis=0)))
        update_meta_atom(basis, n)
        # the grid can only approach the exact minimiser from above
        excess = (basis.g - best_grid) / max(best_grid, np.finfo(float).tiny)
        worst = max(worst, excess, 0.0)
    return CheckResult(name="coordinate update vs grid", max_rel_error=float(worst), tolerance=1e-6)


def check_power_allocation(cases: int = 20, seed: int = 41) -> CheckResult:
    """WMMSE and water-filling agree on interference-free channels."""
    rng = make_rng(seed)
    wmmse_cfg = WmmseConfig(max_iters=5000, tolerance=1e-13)
    worst = 0.0
    for _ in range(cases):
        gains = rng.uniform(0.5, 2.0, 4)
        h = np.diag(np.sqrt(gains)).astype(complex)
        total, noise = 4.0, 1.0
        wf = waterfill_power(gains, total, noise)
        p0 = np.full(4, total / 4)
        wm = wmmse_power(PowerProblem(h=h, total=total, noise=noise), p0, wmmse_cfg)
        rate_wf, rate_wm = achievable_rate(h, wf), achievable_rate(h, wm)
        worst = max(worst, abs(rate_wf - rate_wm) / rate_wf)
    return CheckResult(name="wmmse vs water-filling", max_rel_error=float(worst), tolerance=1e-6)


def self_check() -> SelfCheckReport:
    report = SelfCheckReport()
    for check in (check_gradients, check_factorization, check_coordinate_update, check_power_allocation):
        start = time.perf_counter()
        result = check()
        logger.debug(f"{result.name} took {time.perf_counter() - start:.2f}s")
        report.checks.append(result)
    return report


def time_gradient(atoms: int, layers: int, streams: int, repeats: int = 7, seed: int = 5) -> float:
    """Median wall time in seconds of one TX gradient evaluation."""
    problem, phases, power = toy_problem(streams, atoms, layers, seed)
    rmax.euclidean_gradient_tx(problem, phases, power)
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        rmax.euclidean_gradient_tx(problem, phases, power)
        samples.append(time.perf_counter() - start)
    return float(np.median(samples))
