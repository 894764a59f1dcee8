"""Riemannian quasi-Newton ascent on the product of complex unit circles.

Points are unit-modulus complex vectors, tangent vectors are complex vectors
v with Re{v * conj(theta)} = 0, and the metric is Re{<u, v>}. Retraction is
elementwise normalisation, vector transport is projection onto the tangent
space at the new point.

Gradients handed to `optimize_phases` follow the d f / d theta* convention;
the ascent direction in the real metric is twice that.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]


@dataclass
class ManifoldConfig:
    max_iters: int = 30
    gradient_tolerance: float = 1e-6
    sufficient_increase: float = 1e-4
    backtrack_factor: float = 0.5
    max_line_search_evals: int = 25
    initial_step: float = 0.5
    # 0 keeps a dense inverse Hessian, > 0 keeps that many (s, y) pairs
    bfgs_memory: int = 0
    curvature_tolerance: float = 1e-12


@dataclass
class PhaseSearchResult:
    theta: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    evaluations: int
    line_search_failed: bool = False
    values: list[float] = field(default_factory=list)


def inner(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.real(np.vdot(u, v)))


def norm(v: np.ndarray) -> float:
    return float(np.linalg.norm(v))


def project_to_tangent(egrad: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return egrad - np.real(egrad * theta.conj()) * theta


def retract(theta: np.ndarray, tangent: np.ndarray, step: float) -> np.ndarray:
    if step == 0:
        return theta.copy()
    y = theta + step * tangent
    mod = np.abs(y)
    out = theta.copy()
    ok = mod > 0
    out[ok] = y[ok] / mod[ok]
    return out


def transport(theta_new: np.ndarray, v: np.ndarray) -> np.ndarray:
    return project_to_tangent(v, theta_new)


def riemannian_gradient(grad: Gradient, theta: np.ndarray) -> np.ndarray:
    return project_to_tangent(2.0 * grad(theta), theta)


class _DenseInverseHessian:
    """Inverse Hessian approximation on R^{2n}, transported by P H P."""

    def __init__(self, size: int):
        self.size = size
        self.mat = None

    @staticmethod
    def _real(v: np.ndarray) -> np.ndarray:
        return np.concatenate([v.real, v.imag])

    def _complex(self, x: np.ndarray) -> np.ndarray:
        return x[:self.size] + 1j * x[self.size:]

    def _projector(self, theta: np.ndarray) -> np.ndarray:
        t = self._real(theta)
        n = self.size
        # block diagonal of t_i t_i^T in [re | im] ordering
        proj = np.eye(2 * n)
        idx = np.arange(n)
        re, im = t[:n], t[n:]
        proj[idx, idx] -= re * re
        proj[idx, idx + n] -= re * im
        proj[idx + n, idx] -= im * re
        proj[idx + n, idx + n] -= im * im
        return proj

    def direction(self, rgrad: np.ndarray) -> np.ndarray:
        if self.mat is None:
            return rgrad
        return self._complex(self.mat @ self._real(rgrad))

    def transport(self, theta_new: np.ndarray):
        if self.mat is not None:
            proj = self._projector(theta_new)
            self.mat = proj @ self.mat @ proj

    def update(self, s: np.ndarray, y: np.ndarray, theta_new: np.ndarray):
        s_r, y_r = self._real(s), self._real(y)
        sy = float(s_r @ y_r)
        if self.mat is None:
            self.mat = (sy / float(y_r @ y_r)) * self._projector(theta_new)
        rho = 1.0 / sy
        hy = self.mat @ y_r
        # (I - rho s y^T) H (I - rho y s^T) + rho s s^T
        self.mat = (self.mat
                    - rho * (np.outer(s_r, hy) + np.outer(hy, s_r))
                    + (rho * rho * float(y_r @ hy) + rho) * np.outer(s_r, s_r))

    def reset(self):
        self.mat = None

    def empty(self) -> bool:
        return self.mat is None


class _LimitedMemoryInverseHessian:
    """Two-loop recursion over transported (s, y) pairs."""

    def __init__(self, memory: int):
        self.memory = memory
        self.pairs: list[tuple[np.ndarray, np.ndarray, float]] = []
        self.gamma = 1.0

    def direction(self, rgrad: np.ndarray) -> np.ndarray:
        if not self.pairs:
            return rgrad
        q = rgrad.copy()
        alphas = []
        for s, y, rho in reversed(self.pairs):
            a = rho * inner(s, q)
            q = q - a * y
            alphas.append(a)
        r = self.gamma * q
        for (s, y, rho), a in zip(self.pairs, reversed(alphas)):
            b = rho * inner(y, r)
            r = r + (a - b) * s
        return r

    def transport(self, theta_new: np.ndarray):
        self.pairs = [(transport(theta_new, s), transport(theta_new, y), rho) for s, y, rho in self.pairs]

    def update(self, s: np.ndarray, y: np.ndarray, theta_new: np.ndarray):
        sy = inner(s, y)
        self.pairs.append((s, y, 1.0 / sy))
        if len(self.pairs) > self.memory:
            self.pairs.pop(0)
        self.gamma = sy / inner(y, y)

    def reset(self):
        self.pairs = []
        self.gamma = 1.0

    def empty(self) -> bool:
        return not self.pairs


def optimize_phases(objective: Objective, grad: Gradient, theta0: np.ndarray,
                    cfg: ManifoldConfig = None, side: str = "") -> PhaseSearchResult:
    """Riemannian BFGS ascent of `objective` from `theta0` with Armijo backtracking."""
    cfg = cfg or ManifoldConfig()
    theta = theta0.copy()
    value = objective(theta)
    rgrad = riemannian_gradient(grad, theta)
    gnorm = norm(rgrad)
    evaluations = 1
    values = [value]

    hess = _DenseInverseHessian(theta.size) if cfg.bfgs_memory == 0 \
        else _LimitedMemoryInverseHessian(cfg.bfgs_memory)

    failed = False
    it = 0
    while it < cfg.max_iters and gnorm >= cfg.gradient_tolerance:
        direction = project_to_tangent(hess.direction(rgrad), theta)
        slope = inner(rgrad, direction)
        if slope <= 0:
            logger.debug(f"[{side}] quasi-Newton direction is not ascending, falling back to gradient")
            hess.reset()
            direction, slope = rgrad, gnorm * gnorm

        # no curvature yet: scale the first trial step to a fixed length
        alpha = cfg.initial_step / norm(direction) if hess.empty() else 1.0
        accepted = False
        for _ in range(cfg.max_line_search_evals):
            candidate = retract(theta, direction, alpha)
            cand_value = objective(candidate)
            evaluations += 1
            if cand_value >= value + cfg.sufficient_increase * alpha * slope:
                accepted = True
                break
            alpha *= cfg.backtrack_factor

        if not accepted:
            logger.debug(f"[{side}] line search failed at iteration {it}, keeping best iterate")
            failed = True
            break

        new_rgrad = riemannian_gradient(grad, candidate)
        step = transport(candidate, alpha * direction)
        # ascent of f == descent of -f
        y = -(new_rgrad - transport(candidate, rgrad))
        s = step
        hess.transport(candidate)
        if inner(s, y) > cfg.curvature_tolerance:
            hess.update(s, y, candidate)
        else:
            logger.debug(f"[{side}] skipped BFGS update, curvature {inner(s, y):.3e}")

        theta, value, rgrad = candidate, cand_value, new_rgrad
        gnorm = norm(rgrad)
        values.append(value)
        it += 1

    return PhaseSearchResult(theta=theta, value=value, grad_norm=gnorm, iterations=it,
                             evaluations=evaluations, line_search_failed=failed, values=values)
