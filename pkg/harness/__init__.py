from dataclasses import dataclass, field
from typing import *

import numpy as np
from pydantic import BaseModel


class TrialRow(BaseModel):
    axis_name: str
    axis_value: float
    trial: int
    seed: int
    algo: str
    rate_bps_hz: float
    interference: float
    outer_iters: int
    wall_ms: float


class AggregateRow(BaseModel):
    axis_value: float
    algo: str
    mean_rate: float
    std_rate: float
    n: int


@dataclass
class SweepResult:
    axis_name: str
    axis_values: list[float]
    algorithms: list[str]
    trials: int
    rows: list[TrialRow] = field(default_factory=list)

    def rates(self, axis_value: float, algo: str) -> np.ndarray:
        return np.array([r.rate_bps_hz for r in self.rows if r.axis_value == axis_value and r.algo == algo])

    def aggregate(self) -> list[AggregateRow]:
        """Mean and population standard deviation per (axis value, algorithm)."""
        out = []
        for value in self.axis_values:
            for algo in self.algorithms:
                rates = self.rates(value, algo)
                out.append(AggregateRow(axis_value=value, algo=algo, mean_rate=float(np.mean(rates)),
                                        std_rate=float(np.std(rates)), n=int(rates.size)))
        return out

    def mean(self, axis_value: float, algo: str) -> float:
        return float(np.mean(self.rates(axis_value, algo)))
