"""Physical layout of the transmit/receive stacked metasurfaces and the fixed
inter-layer propagation matrices (Rayleigh-Sommerfeld diffraction).

Conventions:
  - z is the boresight axis. TX antennas sit on a ULA centred at (0, 0, 0),
    RX antennas on a ULA centred at (0, 0, d), both parallel to x.
  - TX layer l (1-based) lies at z = l * D_TX / L, RX layer k at
    z = d - k * D_RX / K, so RX layer K faces the TX-SIM.
  - Atoms are enumerated row-major on a rows x cols grid centred on the z axis.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from utils import ConfigError, DomainError
from utils.consts import SPEED_OF_LIGHT

logger = logging.getLogger(__name__)

Z_AXIS = np.array([0.0, 0.0, 1.0])


@dataclass
class GeometryConfig:
    num_streams: int = 4
    tx_atoms: int = 25
    rx_atoms: int = 25
    tx_layers: int = 4
    rx_layers: int = 4
    carrier_hz: float = 6e9
    tx_thickness: float = 0.1
    rx_thickness: float = 0.1
    link_distance: float = 240.0
    # None -> lambda^2 / 4, lambda / 2, lambda / 2
    atom_area: float | None = None
    atom_pitch: float | None = None
    antenna_spacing: float | None = None
    # explicit [rows, cols] when the atom count is not a perfect square
    tx_grid: list[int] | None = None
    rx_grid: list[int] | None = None

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz


@dataclass(frozen=True)
class SimGeometry:
    num_streams: int
    tx_atoms_per_layer: int
    rx_atoms_per_layer: int
    tx_layers: int
    rx_layers: int
    wavelength: float
    atom_area: float
    tx_thickness: float
    rx_thickness: float
    link_distance: float
    tx_antennas: np.ndarray         # (S, 3)
    rx_antennas: np.ndarray         # (S, 3)
    tx_atom_positions: np.ndarray   # (L, N, 3)
    rx_atom_positions: np.ndarray   # (K, M, 3)
    layer_normal: np.ndarray = field(default_factory=lambda: Z_AXIS.copy())

    def show(self) -> str:
        return (f"SimGeometry(S={self.num_streams}, N={self.tx_atoms_per_layer}, M={self.rx_atoms_per_layer}, "
                f"L={self.tx_layers}, K={self.rx_layers}, lambda={self.wavelength:.4g} m, "
                f"D_TX={self.tx_thickness} m, D_RX={self.rx_thickness} m, d={self.link_distance} m)")


@dataclass(frozen=True)
class PropagationSet:
    # omega_tx[0]: N x S (antennas -> layer 1), omega_tx[l-1]: N x N (layer l-1 -> l)
    omega_tx: tuple[np.ndarray, ...]
    # omega_rx[0]: S x M (layer 1 -> antennas), omega_rx[k-1]: M x M (layer k -> k-1)
    omega_rx: tuple[np.ndarray, ...]

    @property
    def tx_layers(self) -> int:
        return len(self.omega_tx)

    @property
    def rx_layers(self) -> int:
        return len(self.omega_rx)


def _grid_shape(count: int, override: list[int] | None, side: str) -> tuple[int, int]:
    if override is not None:
        if len(override) != 2 or override[0] * override[1] != count:
            raise ConfigError(f"{side} grid override {override} does not arrange {count} atoms")
        return int(override[0]), int(override[1])
    root = math.isqrt(count)
    if root * root != count:
        raise ConfigError(f"{side} atom count {count} is not a perfect square, set {side}_grid=[rows, cols]")
    return root, root


def planar_grid(rows: int, cols: int, pitch: float, z: float) -> np.ndarray:
    r, c = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    x = (c.ravel() - (cols - 1) / 2.0) * pitch
    y = (r.ravel() - (rows - 1) / 2.0) * pitch
    return np.column_stack([x, y, np.full(rows * cols, z)])


def linear_array(count: int, spacing: float, z: float) -> np.ndarray:
    x = (np.arange(count) - (count - 1) / 2.0) * spacing
    return np.column_stack([x, np.zeros(count), np.full(count, z)])


def build_geometry(cfg: GeometryConfig) -> SimGeometry:
    for name in ("num_streams", "tx_atoms", "rx_atoms", "tx_layers", "rx_layers"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be >= 1, got {getattr(cfg, name)}")
    for name in ("carrier_hz", "tx_thickness", "rx_thickness", "link_distance"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be positive, got {getattr(cfg, name)}")

    lam = cfg.wavelength
    pitch = cfg.atom_pitch if cfg.atom_pitch is not None else lam / 2
    spacing = cfg.antenna_spacing if cfg.antenna_spacing is not None else lam / 2
    area = cfg.atom_area if cfg.atom_area is not None else lam ** 2 / 4

    tx_rows, tx_cols = _grid_shape(cfg.tx_atoms, cfg.tx_grid, "tx")
    rx_rows, rx_cols = _grid_shape(cfg.rx_atoms, cfg.rx_grid, "rx")

    d = cfg.link_distance
    tx_dz = cfg.tx_thickness / cfg.tx_layers
    rx_dz = cfg.rx_thickness / cfg.rx_layers
    tx_atoms = np.stack([planar_grid(tx_rows, tx_cols, pitch, l * tx_dz)
                         for l in range(1, cfg.tx_layers + 1)])
    rx_atoms = np.stack([planar_grid(rx_rows, rx_cols, pitch, d - k * rx_dz)
                         for k in range(1, cfg.rx_layers + 1)])

    geom = SimGeometry(
        num_streams=cfg.num_streams,
        tx_atoms_per_layer=cfg.tx_atoms,
        rx_atoms_per_layer=cfg.rx_atoms,
        tx_layers=cfg.tx_layers,
        rx_layers=cfg.rx_layers,
        wavelength=lam,
        atom_area=area,
        tx_thickness=cfg.tx_thickness,
        rx_thickness=cfg.rx_thickness,
        link_distance=d,
        tx_antennas=linear_array(cfg.num_streams, spacing, 0.0),
        rx_antennas=linear_array(cfg.num_streams, spacing, d),
        tx_atom_positions=tx_atoms,
        rx_atom_positions=rx_atoms,
    )
    logger.debug(f"built {geom.show()}")
    return geom


def rs_coefficient(src: np.ndarray, dst: np.ndarray, normal: np.ndarray,
                   wavelength: float, area: float) -> complex:
    """Rayleigh-Sommerfeld coefficient from a point at `src` to `dst`.

    `normal` is the unit normal of the source layer; cos(chi) is measured
    between it and the propagation direction.
    """
    delta = np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)
    dist = float(np.linalg.norm(delta))
    if dist == 0.0:
        raise DomainError(f"coincident points at {src}")
    cos_chi = float(np.dot(delta, normal)) / dist
    return (area * cos_chi / dist) * (1 / (2 * np.pi * dist) - 1j / wavelength) \
        * np.exp(1j * 2 * np.pi * dist / wavelength)


def rs_matrix(src: np.ndarray, dst: np.ndarray, normal: np.ndarray,
              wavelength: float, area: float) -> np.ndarray:
    """Vectorised `rs_coefficient`; entry (i, j) maps src[j] to dst[i]."""
    dist = cdist(dst, src)
    if np.any(dist == 0.0):
        raise DomainError("coincident points between layers")
    # dz projected on the source normal, for every (dst, src) pair
    proj = dst @ normal
    proj = proj[:, None] - (src @ normal)[None, :]
    cos_chi = proj / dist
    return (area * cos_chi / dist) * (1 / (2 * np.pi * dist) - 1j / wavelength) \
        * np.exp(1j * 2 * np.pi * dist / wavelength)


def build_propagation_matrices(geom: SimGeometry) -> PropagationSet:
    lam, area, normal = geom.wavelength, geom.atom_area, geom.layer_normal

    omega_tx = [rs_matrix(geom.tx_antennas, geom.tx_atom_positions[0], normal, lam, area)]
    for l in range(1, geom.tx_layers):
        omega_tx.append(rs_matrix(geom.tx_atom_positions[l - 1], geom.tx_atom_positions[l], normal, lam, area))

    omega_rx = [rs_matrix(geom.rx_atom_positions[0], geom.rx_antennas, normal, lam, area)]
    for k in range(1, geom.rx_layers):
        omega_rx.append(rs_matrix(geom.rx_atom_positions[k], geom.rx_atom_positions[k - 1], normal, lam, area))

    for mat in omega_tx + omega_rx:
        if not np.all(np.isfinite(mat)):
            raise DomainError("non-finite propagation coefficient")

    return PropagationSet(omega_tx=tuple(omega_tx), omega_rx=tuple(omega_rx))
