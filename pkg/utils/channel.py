"""Spatially correlated Rayleigh channel between the TX-SIM and the RX-SIM.

H = R_rx^{1/2} H_w R_tx^{1/2}, H_w i.i.d. CN(0, xi), with the isotropic
scattering correlation sinc(2 d / lambda) over the facing layers.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.spatial.distance import cdist

from utils import DomainError, db_to_linear

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
EIG_TOL = 1e-10


@dataclass(frozen=True)
class PathLossParams:
    d0: float
    d: float
    a1: float
    a2: float
    wavelength: float
    literal: bool = False

    def validate(self):
        if not self.d0 > 0:
            raise DomainError(f"reference distance must be positive, got {self.d0}")
        if self.d < self.d0:
            raise DomainError(f"link distance {self.d} is below reference distance {self.d0}")


@dataclass(frozen=True)
class CorrelationPair:
    r_tx: np.ndarray
    r_rx: np.ndarray
    sqrt_r_tx: np.ndarray
    sqrt_r_rx: np.ndarray

    @classmethod
    def from_matrices(cls, r_tx: np.ndarray, r_rx: np.ndarray) -> "CorrelationPair":
        return cls(r_tx=r_tx, r_rx=r_rx, sqrt_r_tx=psd_sqrt(r_tx), sqrt_r_rx=psd_sqrt(r_rx))


@dataclass(frozen=True)
class ChannelRealization:
    h_tilde: np.ndarray  # M x N
    seed: int
    xi_linear: float


def path_gain_db(p: PathLossParams) -> float:
    p.validate()
    ref = 10 * p.a1 * np.log10(4 * np.pi * p.d0 / p.wavelength)
    if p.literal:
        # the formula evaluated exactly as printed
        return ref + 10 * p.a2 * np.log10(p.d0 / p.d)
    return -ref - 10 * p.a2 * np.log10(p.d / p.d0)


def path_gain_linear(p: PathLossParams) -> float:
    return db_to_linear(path_gain_db(p))


def correlation_matrix(positions: np.ndarray, wavelength: float) -> np.ndarray:
    positions = np.atleast_2d(positions)
    dist = cdist(positions, positions)
    # np.sinc(x) = sin(pi x) / (pi x)
    return np.sinc(2 * dist / wavelength)


def psd_sqrt(r: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(r))))
    if np.max(np.abs(r - r.conj().T)) > HERMITIAN_TOL * scale:
        raise DomainError("psd_sqrt expects a Hermitian matrix")
    w, u = eigh(r)
    if w.min() < -EIG_TOL * scale:
        logger.warning(f"clamping eigenvalue {w.min():.3e} of correlation matrix")
    w = np.clip(w, 0.0, None)
    root = (u * np.sqrt(w)) @ u.conj().T
    return (root + root.conj().T) / 2


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sample_channel(seed: int, xi_linear: float, corr: CorrelationPair) -> ChannelRealization:
    m, n = corr.sqrt_r_rx.shape[0], corr.sqrt_r_tx.shape[0]
    rng = make_rng(seed)
    # CN(0, xi) per entry
    h_w = np.sqrt(xi_linear / 2) * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
    h = corr.sqrt_r_rx @ h_w @ corr.sqrt_r_tx
    return ChannelRealization(h_tilde=h, seed=seed, xi_linear=xi_linear)
