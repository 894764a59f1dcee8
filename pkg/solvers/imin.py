"""Interference minimisation by cyclic per-meta-atom updates, followed by
water-filling on the (then nearly diagonal) effective channel.

For one layer of one side the effective channel factors as
H = a diag(theta) b, so every off-diagonal entry H_sj is linear in the layer's
phases: vec_offdiag(H) = E theta with E[(s, j), n] = a[s, n] b[n, j]. Pairs are
ordered like the off-diagonal entries of vec(H) (column-major, s != j).
"""
import logging
import time
from dataclasses import dataclass

import numpy as np

from solvers import BaseSolver, IterationRecord, SolutionTrace
from utils import ConfigError, DomainError
from utils.cascade import (PhaseConfig, Side, achievable_rate, interference_power, partial_cascades,
                           phase_blocks, rx_cascade, tx_cascade)
from utils.model import LinkProblem
from utils.power import waterfill_power

logger = logging.getLogger(__name__)

# relative size of a coupling coefficient below which the phase is kept
TIE_TOLERANCE = 1e-14
RESYNC_TOLERANCE = 1e-9


@dataclass
class IminConfig:
    max_sweeps: int = 200
    tolerance: float = 1e-8
    resync_every: int = 100
    track_updates: bool = False

    def validate(self):
        if self.max_sweeps < 0 or self.resync_every < 1:
            raise ConfigError(f"invalid iteration counts in {self}")
        if not 0 < self.tolerance < 1:
            raise ConfigError(f"tolerance must lie in (0, 1), got {self.tolerance}")


@dataclass
class InterferenceBasis:
    columns: np.ndarray  # S(S-1) x atoms
    theta: np.ndarray    # current phases of the layer
    partial: np.ndarray  # columns @ theta

    @classmethod
    def from_factors(cls, a: np.ndarray, b: np.ndarray, theta: np.ndarray) -> "InterferenceBasis":
        columns = offdiagonal_columns(a, b)
        theta = theta.astype(complex)
        return cls(columns=columns, theta=theta, partial=columns @ theta)

    @property
    def g(self) -> float:
        return float(np.vdot(self.partial, self.partial).real)

    def resync(self) -> float:
        """Recompute the cached sum; returns the drift removed, relative to sum_i ||e_i||."""
        fresh = self.columns @ self.theta
        # |theta_i| = 1, so ||E theta|| <= sum_i ||e_i||
        scale = max(float(np.linalg.norm(self.columns, axis=0).sum()), np.finfo(float).tiny)
        drift = float(np.linalg.norm(fresh - self.partial)) / scale
        self.partial = fresh
        return drift


def offdiagonal_pairs(streams: int) -> np.ndarray:
    """Indices s + j * S of the off-diagonal entries of vec(H)."""
    return np.array([s + j * streams for j in range(streams) for s in range(streams) if s != j], dtype=int)


def offdiagonal_columns(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    streams = a.shape[0]
    # full[j, s, n] = a[s, n] * b[n, j]
    full = a[None, :, :] * b.T[:, None, :]
    return full.reshape(streams * streams, -1)[offdiagonal_pairs(streams)]


def interference_columns(side: Side, layer: int, problem: LinkProblem, phases: PhaseConfig) -> InterferenceBasis:
    """Basis of layer `layer` (1-based) of `side` at the current phases."""
    omega_tx, omega_rx = problem.props.omega_tx, problem.props.omega_rx
    h_tilde = problem.channel.h_tilde
    if side == "tx":
        minus, plus = partial_cascades(omega_tx, phases.theta_tx, "tx", layer)
        a = rx_cascade(omega_rx, phases.theta_rx) @ h_tilde @ plus
        b = minus @ omega_tx[0]
        theta = phase_blocks(phases.theta_tx, len(omega_tx))[layer - 1]
    elif side == "rx":
        minus, plus = partial_cascades(omega_rx, phases.theta_rx, "rx", layer)
        a = omega_rx[0] @ minus
        b = plus @ h_tilde @ tx_cascade(omega_tx, phases.theta_tx)
        theta = phase_blocks(phases.theta_rx, len(omega_rx))[layer - 1]
    else:
        raise DomainError(f"unknown side {side}")
    return InterferenceBasis.from_factors(a, b, theta)


def update_meta_atom(basis: InterferenceBasis, n: int) -> complex:
    """Minimise ||E theta||^2 over theta_n alone; updates the basis in place."""
    if not 0 <= n < basis.theta.size:
        raise DomainError(f"atom index {n} out of range 0..{basis.theta.size - 1}")
    e_n = basis.columns[:, n]
    rest = basis.partial - e_n * basis.theta[n]
    coupling = np.vdot(e_n, rest)
    old = basis.theta[n]
    if abs(coupling) <= TIE_TOLERANCE * np.linalg.norm(e_n) * np.linalg.norm(rest):
        return old

    new = -coupling / abs(coupling)
    basis.theta[n] = new
    basis.partial = rest + e_n * new
    return new


def _waterfill_rate(problem: LinkProblem, phases: PhaseConfig) -> tuple[float, np.ndarray]:
    h = problem.effective(phases).h
    power = waterfill_power(np.abs(np.diag(h)) ** 2, problem.total_power, problem.noise)
    return achievable_rate(h, power), h


def run_imin(problem: LinkProblem, init: PhaseConfig, cfg: IminConfig = None,
             algorithm: str = "imin") -> SolutionTrace:
    cfg = cfg or IminConfig()
    cfg.validate()
    init.validate()

    start = time.perf_counter()
    phases = PhaseConfig(theta_tx=init.theta_tx.astype(complex).copy(),
                         theta_rx=init.theta_rx.astype(complex).copy())
    rate, h = _waterfill_rate(problem, phases)
    g = interference_power(h)
    records = [IterationRecord(iter=0, rate=rate, g=g)]
    update_g = [g] if cfg.track_updates else None

    layers = {"tx": problem.props.tx_layers, "rx": problem.props.rx_layers}
    updates = 0
    sweep = 0
    if problem.num_streams == 1:
        logger.debug(f"[{algorithm}] single stream, nothing to cancel")
    else:
        for sweep in range(1, cfg.max_sweeps + 1):
            g_before = g
            for side in ("tx", "rx"):
                theta = phases.get(side).copy()
                size = theta.size // layers[side]
                for layer in range(1, layers[side] + 1):
                    basis = interference_columns(side, layer, problem, phases)
                    for n in range(size):
                        update_meta_atom(basis, n)
                        updates += 1
                        if updates % cfg.resync_every == 0:
                            drift = basis.resync()
                            if drift > RESYNC_TOLERANCE:
                                logger.warning(f"[{algorithm}] interference cache drifted by {drift:.3e}, resynced")
                        if update_g is not None:
                            update_g.append(basis.g)
                    theta[(layer - 1) * size:layer * size] = basis.theta
                    phases = phases.replace(side, theta.copy())

            rate, h = _waterfill_rate(problem, phases)
            g = interference_power(h)
            records.append(IterationRecord(iter=sweep, rate=rate, g=g,
                                           wall_ms=1000 * (time.perf_counter() - start)))
            logger.debug(f"[{algorithm}] sweep {sweep}: g {g:.6e}, rate {rate:.6f}")

            if g_before <= 0 or (g_before - g) / g_before < cfg.tolerance:
                break

    h = problem.effective(phases).h
    power = waterfill_power(np.abs(np.diag(h)) ** 2, problem.total_power, problem.noise)
    trace = SolutionTrace(
        algorithm=algorithm, phases=phases, power=power, rate=achievable_rate(h, power),
        interference=interference_power(h), outer_iters=sweep, records=records,
        wall_ms=1000 * (time.perf_counter() - start), update_g=update_g)
    logger.info(f"[{algorithm}] rate {trace.rate:.4f} bps/Hz, g {trace.interference:.4e} "
                f"after {sweep} sweeps ({trace.wall_ms / 1000:.2f}s)")
    return trace


class IminSolver(BaseSolver):
    name = "imin"

    def __init__(self, cfg: IminConfig = None):
        self.cfg = cfg or IminConfig()

    def solve(self, problem: LinkProblem, init: PhaseConfig) -> SolutionTrace:
        return run_imin(problem, init, self.cfg, algorithm=self.name)
