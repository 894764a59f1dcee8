import logging
from dataclasses import asdict, dataclass
from typing import *

import numpy as np
from dacite import from_dict

from utils import ConfigError, dbm_to_watts
from utils.cascade import EffectiveChannel, PhaseConfig, PowerVector, achievable_rate, effective_channel
from utils.channel import (ChannelRealization, CorrelationPair, PathLossParams, correlation_matrix,
                           make_rng, path_gain_linear, sample_channel)
from utils.geometry import (GeometryConfig, PropagationSet, SimGeometry, build_geometry,
                            build_propagation_matrices)

logger = logging.getLogger(__name__)


@dataclass
class SimModelConfig:
    # geometry
    num_streams: int = 4
    tx_atoms: int = 25
    rx_atoms: int = 25
    tx_layers: int = 4
    rx_layers: int = 4
    carrier_hz: float = 6e9
    tx_thickness: float = 0.1
    rx_thickness: float = 0.1
    link_distance: float = 240.0
    atom_area: float | None = None
    atom_pitch: float | None = None
    antenna_spacing: float | None = None
    tx_grid: list[int] | None = None
    rx_grid: list[int] | None = None

    # path loss
    d0: float = 1.0
    a1: float = 2.0
    a2: float = 3.5
    pathloss_literal: bool = False

    # powers, converted once to watts
    tx_power_dbm: float = 20.0
    noise_dbm: float = -110.0


@dataclass(frozen=True)
class LinkProblem:
    """One channel draw over a fixed SIM pair, plus the power budget."""
    channel: ChannelRealization
    props: PropagationSet
    total_power: float
    noise: float

    @property
    def num_streams(self) -> int:
        return self.props.omega_tx[0].shape[1]

    @property
    def tx_size(self) -> int:
        return self.props.omega_tx[0].shape[0] * self.props.tx_layers

    @property
    def rx_size(self) -> int:
        return self.props.omega_rx[0].shape[1] * self.props.rx_layers

    def effective(self, phases: PhaseConfig) -> EffectiveChannel:
        return effective_channel(self.channel.h_tilde, phases, self.props.omega_tx, self.props.omega_rx)

    def rate(self, phases: PhaseConfig, power: PowerVector) -> float:
        return achievable_rate(self.effective(phases).h, power)

    def equal_power(self) -> PowerVector:
        return PowerVector.equal(self.num_streams, self.total_power, self.noise)


class SimModel:
    """Geometry, propagation matrices and channel statistics of one configuration."""

    def __init__(self, cfg: SimModelConfig):
        self.cfg = cfg
        self.geometry: SimGeometry = build_geometry(from_dict(data_class=GeometryConfig, data=asdict(cfg)))
        self.props: PropagationSet = build_propagation_matrices(self.geometry)

        lam = self.geometry.wavelength
        try:
            self.xi = path_gain_linear(PathLossParams(
                d0=cfg.d0, d=cfg.link_distance, a1=cfg.a1, a2=cfg.a2, wavelength=lam,
                literal=cfg.pathloss_literal))
        except ValueError as e:
            raise ConfigError(str(e)) from e

        # correlation over the layers facing the link
        self.corr = CorrelationPair.from_matrices(
            correlation_matrix(self.geometry.tx_atom_positions[-1], lam),
            correlation_matrix(self.geometry.rx_atom_positions[-1], lam))

        self.total_power = dbm_to_watts(cfg.tx_power_dbm)
        self.noise = dbm_to_watts(cfg.noise_dbm)
        logger.debug(f"model ready: {self.show()}")

    def show(self) -> str:
        return (f"{self.geometry.show()}, xi={10 * np.log10(self.xi):.2f} dB, "
                f"P_t={self.cfg.tx_power_dbm} dBm, noise={self.cfg.noise_dbm} dBm")

    def sample_problem(self, seed: int) -> LinkProblem:
        channel = sample_channel(seed, self.xi, self.corr)
        return LinkProblem(channel=channel, props=self.props, total_power=self.total_power, noise=self.noise)

    def random_phases(self, seed: int) -> PhaseConfig:
        g = self.geometry
        return PhaseConfig.random(make_rng(seed), g.tx_atoms_per_layer * g.tx_layers,
                                  g.rx_atoms_per_layer * g.rx_layers)
