from dataclasses import dataclass
import logging

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 3e8  # m/s, 6 GHz -> 50 mm

ALGORITHMS = ("rmax-random", "imin", "hybrid")
SWEEP_AXES = ("layers", "thickness")

CSV_COLUMNS = ["axis_name", "axis_value", "trial", "seed", "algo",
               "rate_bps_hz", "interference", "outer_iters", "wall_ms"]
AGG_COLUMNS = ["axis_value", "algo", "mean_rate", "std_rate", "n"]
TRACE_COLUMNS = ["iter", "rate", "grad_norm_tx", "grad_norm_rx", "g"]

# seed purposes, see harness.sweeps.purpose_seed
SEED_CHANNEL = 0
SEED_PHASES = 1


# Shared physical parameter set; presets override the sizes.
BASE_PRESET = {
    "carrier_hz": 6e9,
    "num_streams": 4,
    "tx_thickness": 0.1,
    "rx_thickness": 0.1,
    "link_distance": 240.0,
    "d0": 1.0,
    "a1": 2.0,
    "a2": 3.5,
    "tx_power_dbm": 20.0,
    "noise_dbm": -110.0,
}

PRESETS = {
    "desk": {
        **BASE_PRESET,
        "tx_atoms": 25, "rx_atoms": 25,
        "tx_layers": 4, "rx_layers": 4,
        "trials": 20,
        "axis_values": [1, 2, 3, 4, 5, 6],
    },
    "full": {
        **BASE_PRESET,
        "tx_atoms": 100, "rx_atoms": 100,
        "tx_layers": 7, "rx_layers": 7,
        "trials": 100,
        "axis_values": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    },
}


@dataclass
class SelfCheckCase:
    name: str
    num_streams: int
    atoms: int
    layers: int
    seed: int
    tolerance: float


def get_self_check_cases() -> list[SelfCheckCase]:
    return [
        SelfCheckCase(name="gradient-L1", num_streams=2, atoms=4, layers=1, seed=11, tolerance=1e-5),
        SelfCheckCase(name="gradient-L2", num_streams=2, atoms=9, layers=2, seed=12, tolerance=1e-5),
        SelfCheckCase(name="gradient-L3", num_streams=2, atoms=4, layers=3, seed=13, tolerance=1e-5),
    ]
