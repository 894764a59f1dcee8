"""Monte-Carlo experiments: every trial draws one channel and one random phase
initialisation and runs all selected algorithms on that same pair."""
import logging
from concurrent.futures import as_completed
from typing import *

import numpy as np
from tqdm import tqdm

from harness import SweepResult, TrialRow
from harness.config import ExperimentConfig
from solvers import SolutionTrace, get_solver
from utils import ConfigError, state
from utils.cascade import PhaseConfig
from utils.consts import ALGORITHMS, SEED_CHANNEL, SEED_PHASES
from utils.model import LinkProblem, SimModel

logger = logging.getLogger(__name__)


def trial_seed(base_seed: int, axis_index: int, trial_index: int) -> int:
    """u64 seed of one (axis point, trial), independent of every other pair."""
    seq = np.random.SeedSequence(base_seed, spawn_key=(axis_index, trial_index))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def purpose_seed(seed: int, purpose: int) -> int:
    seq = np.random.SeedSequence(seed, spawn_key=(purpose,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def solve_all(problem: LinkProblem, init: PhaseConfig, cfg: ExperimentConfig) -> dict[str, SolutionTrace]:
    """Run the configured algorithms on one problem; imin and hybrid share the IMin run."""
    results = {}
    stage = None
    for algo in cfg.algorithms:
        solver = get_solver(algo, cfg.rmax, cfg.imin, cfg.wmmse)
        if algo == "rmax-random":
            results[algo] = solver.solve(problem, init)
            continue
        if stage is None:
            stage = get_solver("imin", imin_cfg=cfg.imin).solve(problem, init)
        results[algo] = stage if algo == "imin" else solver.solve(problem, init, stage=stage)
    return results


def draw_trial(model: SimModel, seed: int) -> tuple[LinkProblem, PhaseConfig]:
    problem = model.sample_problem(purpose_seed(seed, SEED_CHANNEL))
    init = model.random_phases(purpose_seed(seed, SEED_PHASES))
    return problem, init


def trial_rows(results: dict[str, SolutionTrace], cfg: ExperimentConfig, axis_name: str, axis_value: float,
               trial_index: int, seed: int) -> list[TrialRow]:
    return [TrialRow(axis_name=axis_name, axis_value=axis_value, trial=trial_index, seed=seed, algo=algo,
                     rate_bps_hz=sol.rate, interference=sol.interference, outer_iters=sol.outer_iters,
                     wall_ms=sol.wall_ms if cfg.record_wall_time else 0.0)
            for algo, sol in results.items()]


def run_trial(model: SimModel, cfg: ExperimentConfig, axis_name: str, axis_value: float,
              axis_index: int, trial_index: int) -> list[TrialRow]:
    seed = trial_seed(cfg.seed, axis_index, trial_index)
    problem, init = draw_trial(model, seed)
    return trial_rows(solve_all(problem, init, cfg), cfg, axis_name, axis_value, trial_index, seed)


def run_sweep(cfg: ExperimentConfig, axis_name: str) -> SweepResult:
    if cfg.axis != axis_name:
        raise ConfigError(f"a {axis_name} sweep needs axis '{axis_name}' in the config, got '{cfg.axis}'")
    models = [SimModel(cfg.model_config(axis_name, v)) for v in cfg.axis_values]
    for value, model in zip(cfg.axis_values, models):
        logger.debug(f"{axis_name}={value}: {model.show()}")

    pool = state.get_pool()
    futures = {}
    for i, (value, model) in enumerate(zip(cfg.axis_values, models)):
        for t in range(cfg.trials):
            futures[pool.submit(run_trial, model, cfg, axis_name, value, i, t)] = (i, t)

    collected = {}
    for future in tqdm(as_completed(futures), total=len(futures), desc=f"sweep {axis_name}", unit="trial"):
        collected[futures[future]] = future.result()

    order = {algo: k for k, algo in enumerate(ALGORITHMS)}
    rows = []
    for key in sorted(collected):
        rows.extend(sorted(collected[key], key=lambda r: order[r.algo]))

    result = SweepResult(axis_name=axis_name, axis_values=list(cfg.axis_values),
                         algorithms=list(cfg.algorithms), trials=cfg.trials, rows=rows)
    for agg in result.aggregate():
        logger.info(f"{axis_name}={agg.axis_value:g} {agg.algo}: {agg.mean_rate:.4f} +- {agg.std_rate:.4f} bps/Hz")
    return result


def sweep_layers(cfg: ExperimentConfig) -> SweepResult:
    return run_sweep(cfg, "layers")


def sweep_thickness(cfg: ExperimentConfig) -> SweepResult:
    return run_sweep(cfg, "thickness")


def run_once(cfg: ExperimentConfig) -> tuple[SweepResult, dict[str, SolutionTrace]]:
    """Trial 0 at the configured geometry; also returns the full solutions for tracing."""
    model = SimModel(cfg.model_config())
    seed = trial_seed(cfg.seed, 0, 0)
    problem, init = draw_trial(model, seed)
    results = solve_all(problem, init, cfg)

    rows = trial_rows(results, cfg, "layers", cfg.tx_layers, 0, seed)
    for sol in results.values():
        logger.info(sol.show())
    result = SweepResult(axis_name="layers", axis_values=[cfg.tx_layers], algorithms=list(results),
                         trials=1, rows=rows)
    return result, results
