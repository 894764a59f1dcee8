"""Power allocation over the S streams of an effective channel.

wmmse_power     scalar WMMSE for the interference-aware sum-rate problem
waterfill_power closed-form water-filling for parallel interference-free streams
"""
import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.optimize import bisect

from utils import DomainError
from utils.cascade import PowerVector, achievable_rate

logger = logging.getLogger(__name__)


@dataclass
class WmmseConfig:
    max_iters: int = 500
    tolerance: float = 1e-8
    bracket_tolerance: float = 1e-12
    # also start from equal power and next to every single-stream allocation
    restarts: bool = True
    # smallest start amplitude; a stream at exactly zero power never comes back
    start_floor: float = 1e-2


@dataclass(frozen=True)
class PowerProblem:
    h: np.ndarray
    total: float
    noise: float

    def validate(self):
        if not self.total > 0:
            raise DomainError(f"total power must be positive, got {self.total}")
        if not self.noise > 0:
            raise DomainError(f"noise power must be positive, got {self.noise}")


def _solve_multiplier(b: np.ndarray, c: np.ndarray, budget: float, xtol: float) -> float:
    """mu such that sum_j (b_j / (c_j + mu))^2 == budget over streams with b_j > 0."""
    def excess(mu):
        return float(np.sum((b / (c + mu)) ** 2) - budget)

    if excess(0.0) >= 0:
        upper = 1.0
        while excess(upper) > 0:
            upper *= 2.0
        return bisect(excess, 0.0, upper, xtol=xtol)

    # budget not exhausted: a negative multiplier inflates the streams
    lower = -float(np.min(c))
    gap = 1.0
    while excess(lower + gap) < 0:
        gap /= 2.0
    return bisect(excess, lower + gap, 0.0, xtol=xtol)


def _wmmse_updates(a2: np.ndarray, a_diag: np.ndarray, q: np.ndarray, cfg: WmmseConfig) -> Iterator[np.ndarray]:
    """Normalised amplitudes (noise 1, budget 1) after every receiver/weight/precoder round."""
    for _ in range(cfg.max_iters):
        total = a2 @ (q ** 2) + 1.0
        u = a_diag * q / total
        w = 1.0 / (1.0 - u * a_diag * q)

        b = w * u * a_diag
        c = a2.T @ (w * u ** 2)
        active = b > 0
        if not np.any(active):
            return
        mu = _solve_multiplier(b[active], c[active], 1.0, cfg.bracket_tolerance)
        q = np.zeros_like(q)
        q[active] = b[active] / (c[active] + mu)
        q /= np.sqrt(np.sum(q ** 2))
        yield q


def _floored(q: np.ndarray, floor: float) -> np.ndarray:
    q = np.maximum(q, floor)
    return q / np.sqrt(np.sum(q ** 2))


class _BestAllocation:
    """Best feasible allocation seen so far; history holds its rate after every offer."""

    def __init__(self, problem: PowerProblem, history: list[float] | None):
        self.problem = problem
        self.history = history
        self.rate = -np.inf
        self.p = None

    def offer(self, p: np.ndarray) -> float:
        rate = achievable_rate(self.problem.h, PowerVector(p=p, total=self.problem.total, noise=self.problem.noise))
        if rate > self.rate:
            self.rate, self.p = rate, p
        if self.history is not None:
            self.history.append(self.rate)
        return rate


def wmmse_power(problem: PowerProblem, p0: np.ndarray, cfg: WmmseConfig = None,
                history: list[float] | None = None) -> PowerVector:
    """Sum-rate WMMSE under sum(p) == total.

    Never returns a lower rate than p0. With `cfg.restarts` the ascent is repeated
    from equal power and from next to each single-stream allocation, and every
    single-stream allocation is itself a candidate.
    """
    cfg = cfg or WmmseConfig()
    problem.validate()
    s = problem.h.shape[0]
    if p0.shape != (s,) or np.any(p0 < 0) or abs(p0.sum() - problem.total) > 1e-9 * problem.total:
        raise DomainError(f"infeasible initial power {p0} for total {problem.total}")

    power = PowerVector(p=p0.astype(float), total=problem.total, noise=problem.noise)
    best = _BestAllocation(problem, history)
    best.offer(power.p)
    if not np.any(np.abs(np.diag(problem.h)) > 0):
        return power

    # normalised units: noise 1, budget 1
    a = np.abs(problem.h) * np.sqrt(problem.total / problem.noise)
    a2 = a ** 2
    a_diag = np.diag(a)

    starts = [_floored(np.sqrt(p0 / problem.total), cfg.start_floor)]
    if cfg.restarts and s > 1:
        starts.append(np.full(s, 1.0 / np.sqrt(s)))
        for stream in np.flatnonzero(a_diag > 0):
            corner = np.zeros(s)
            corner[stream] = 1.0
            best.offer(problem.total * corner)
            starts.append(_floored(corner, cfg.start_floor))

    for i, start in enumerate(starts):
        rate = -np.inf
        for it, q in enumerate(_wmmse_updates(a2, a_diag, start, cfg)):
            new_rate = best.offer(problem.total * q ** 2)
            converged = abs(new_rate - rate) < cfg.tolerance
            rate = new_rate
            if converged:
                logger.debug(f"wmmse start {i} converged after {it + 1} iterations, rate {rate:.6f}")
                break

    # exact budget
    return power.with_p(best.p * (problem.total / best.p.sum()))


def waterfill_power(gains: np.ndarray, total: float, noise: float) -> PowerVector:
    """p_s = max(0, mu - noise / g_s), sum p_s = total."""
    gains = np.asarray(gains, dtype=float)
    if np.any(gains < 0):
        raise DomainError("negative stream gain")
    if not np.any(gains > 0):
        raise DomainError("water-filling needs at least one positive gain")

    active = np.flatnonzero(gains > 0)
    order = active[np.argsort(gains[active])[::-1]]
    floors = noise / gains[order]

    # drop the weakest stream while the water level sinks below its floor
    count = order.size
    while count > 1:
        mu = (total + floors[:count].sum()) / count
        if mu > floors[count - 1]:
            break
        count -= 1
    mu = (total + floors[:count].sum()) / count

    p = np.zeros_like(gains)
    p[order[:count]] = mu - floors[:count]
    p = np.maximum(p, 0.0)
    p *= total / p.sum()
    return PowerVector(p=p, total=total, noise=noise)
