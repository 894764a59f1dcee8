"""Wave-domain precoding/combining cascades, effective channel, achievable
rate and inter-stream interference.

Index conventions (1-based layer indices in the public API):
  V_tx = T^L W^L ... T^2 W^2 T^1 W^1              (T = diag(theta), W = omega)
  V_rx = W^1 T^1 W^2 T^2 ... W^K T^K
  V_tx = V_tx^{l+} T^l V_tx^{l-} W^1               for every l
  V_rx = W^1 V_rx^{k-} T^k V_rx^{k+}               for every k
"""
import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from utils import DomainError, check_shape

logger = logging.getLogger(__name__)

UNIT_MODULUS_TOL = 1e-12

Side = Literal["tx", "rx"]


@dataclass(frozen=True)
class PhaseConfig:
    theta_tx: np.ndarray  # N * L, blocks theta_tx^1 .. theta_tx^L
    theta_rx: np.ndarray  # M * K

    def validate(self):
        for name, theta in (("theta_tx", self.theta_tx), ("theta_rx", self.theta_rx)):
            dev = np.max(np.abs(np.abs(theta) - 1.0)) if theta.size else 0.0
            if dev > UNIT_MODULUS_TOL:
                raise DomainError(f"{name} violates unit modulus by {dev:.3e}")

    def replace(self, side: Side, theta: np.ndarray) -> "PhaseConfig":
        if side == "tx":
            return PhaseConfig(theta_tx=theta, theta_rx=self.theta_rx)
        return PhaseConfig(theta_tx=self.theta_tx, theta_rx=theta)

    def get(self, side: Side) -> np.ndarray:
        return self.theta_tx if side == "tx" else self.theta_rx

    @classmethod
    def random(cls, rng: np.random.Generator, tx_size: int, rx_size: int) -> "PhaseConfig":
        # i.i.d. uniform phases on [0, 2 pi)
        psi_tx = rng.uniform(0.0, 2 * np.pi, tx_size)
        psi_rx = rng.uniform(0.0, 2 * np.pi, rx_size)
        return cls(theta_tx=np.exp(1j * psi_tx), theta_rx=np.exp(1j * psi_rx))

    @classmethod
    def ones(cls, tx_size: int, rx_size: int) -> "PhaseConfig":
        return cls(theta_tx=np.ones(tx_size, dtype=complex), theta_rx=np.ones(rx_size, dtype=complex))


@dataclass(frozen=True)
class PowerVector:
    p: np.ndarray
    total: float
    noise: float

    def validate(self):
        if self.noise <= 0:
            raise DomainError(f"noise power must be positive, got {self.noise}")
        if np.any(self.p < 0):
            raise DomainError("negative stream power")
        if abs(self.p.sum() - self.total) > 1e-9 * self.total:
            raise DomainError(f"power vector sums to {self.p.sum()}, expected {self.total}")

    def with_p(self, p: np.ndarray) -> "PowerVector":
        return PowerVector(p=p, total=self.total, noise=self.noise)

    @classmethod
    def equal(cls, streams: int, total: float, noise: float) -> "PowerVector":
        return cls(p=np.full(streams, total / streams), total=total, noise=noise)


@dataclass(frozen=True)
class EffectiveChannel:
    h: np.ndarray     # S x S
    v_tx: np.ndarray  # N x S
    v_rx: np.ndarray  # S x M


def phase_blocks(theta: np.ndarray, layers: int) -> np.ndarray:
    if theta.size % layers:
        raise DomainError(f"phase vector of length {theta.size} does not split into {layers} layers")
    return theta.reshape(layers, -1)


def tx_cascade(omega_tx: Sequence[np.ndarray], theta_tx: np.ndarray) -> np.ndarray:
    blocks = phase_blocks(theta_tx, len(omega_tx))
    n = omega_tx[0].shape[0]
    if blocks.shape[1] != n:
        raise DomainError(f"theta_tx blocks have {blocks.shape[1]} atoms, omega_tx expects {n}")
    v = blocks[0][:, None] * omega_tx[0]
    for l in range(1, len(omega_tx)):
        v = blocks[l][:, None] * (omega_tx[l] @ v)
    return v


def rx_cascade(omega_rx: Sequence[np.ndarray], theta_rx: np.ndarray) -> np.ndarray:
    blocks = phase_blocks(theta_rx, len(omega_rx))
    m = omega_rx[0].shape[1]
    if blocks.shape[1] != m:
        raise DomainError(f"theta_rx blocks have {blocks.shape[1]} atoms, omega_rx expects {m}")
    v = omega_rx[0] * blocks[0][None, :]
    for k in range(1, len(omega_rx)):
        v = (v @ omega_rx[k]) * blocks[k][None, :]
    return v


def partial_cascades(omega: Sequence[np.ndarray], theta: np.ndarray, side: Side,
                     index: int) -> tuple[np.ndarray, np.ndarray]:
    """(V^{index-}, V^{index+}) for one layer, 1-based index."""
    layers = len(omega)
    if not 1 <= index <= layers:
        raise DomainError(f"layer index {index} out of range 1..{layers}")
    blocks = phase_blocks(theta, layers)
    size = blocks.shape[1]
    eye = np.eye(size, dtype=complex)

    if side == "tx":
        minus = eye
        if index >= 2:
            minus = blocks[0][None, :] * eye
            for i in range(2, index):
                minus = blocks[i - 1][:, None] * (omega[i - 1] @ minus)
            minus = omega[index - 1] @ minus
        plus = eye
        for i in range(index + 1, layers + 1):
            plus = blocks[i - 1][:, None] * (omega[i - 1] @ plus)
        return minus, plus

    minus = eye
    if index >= 2:
        minus = eye * blocks[0][None, :]
        for i in range(2, index):
            minus = (minus @ omega[i - 1]) * blocks[i - 1][None, :]
        minus = minus @ omega[index - 1]
    plus = eye
    for i in range(layers, index, -1):
        plus = omega[i - 1] @ (blocks[i - 1][:, None] * plus)
    return minus, plus


def all_partial_cascades(omega: Sequence[np.ndarray], theta: np.ndarray,
                         side: Side) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Every (V^{l-}, V^{l+}) by prefix/suffix accumulation; lists are 0-based."""
    layers = len(omega)
    blocks = phase_blocks(theta, layers)
    eye = np.eye(blocks.shape[1], dtype=complex)
    minus = [eye]
    plus = [eye]

    if side == "tx":
        for l in range(1, layers):
            minus.append(omega[l] @ (blocks[l - 1][:, None] * minus[-1]))
        for l in range(layers - 1, 0, -1):
            plus.append(plus[-1] @ (blocks[l][:, None] * omega[l]))
    else:
        for k in range(1, layers):
            minus.append((minus[-1] * blocks[k - 1][None, :]) @ omega[k])
        for k in range(layers - 1, 0, -1):
            plus.append(omega[k] @ (blocks[k][:, None] * plus[-1]))
    plus.reverse()
    return minus, plus


def effective_channel(h_tilde: np.ndarray, phases: PhaseConfig, omega_tx: Sequence[np.ndarray],
                      omega_rx: Sequence[np.ndarray]) -> EffectiveChannel:
    v_tx = tx_cascade(omega_tx, phases.theta_tx)
    v_rx = rx_cascade(omega_rx, phases.theta_rx)
    check_shape("h_tilde", h_tilde, (v_rx.shape[1], v_tx.shape[0]))
    return EffectiveChannel(h=v_rx @ h_tilde @ v_tx, v_tx=v_tx, v_rx=v_rx)


def stream_terms(h: np.ndarray, p: np.ndarray, noise: float) -> tuple[np.ndarray, np.ndarray]:
    """Per stream (signal + interference + noise, interference + noise)."""
    gains = np.abs(h) ** 2
    total = gains @ p + noise
    interference = total - np.diag(gains) * p
    return total, interference


def achievable_rate(h: np.ndarray, power: PowerVector) -> float:
    if power.noise <= 0:
        raise DomainError(f"noise power must be positive, got {power.noise}")
    gains = np.abs(h) ** 2
    signal = np.diag(gains) * power.p
    interference = gains @ power.p - signal + power.noise
    return float(np.sum(np.log2(1 + signal / interference)))


def interference_power(h: np.ndarray) -> float:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError(f"interference_power expects a square matrix, got {h.shape}")
    gains = np.abs(h) ** 2
    # sum off-diagonal entries directly, total - trace cancels when the diagonal dominates
    return float(gains[~np.eye(h.shape[0], dtype=bool)].sum())
