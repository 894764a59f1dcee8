import json
import unittest

import numpy as np
import pytest

import sim_rate
import utils.cli
from harness import SweepResult, TrialRow
from harness import selfcheck, sweeps, writers
from harness.config import config_from_dict, load_config
from utils import ConfigError, state
from utils.consts import CSV_COLUMNS, PRESETS, TRACE_COLUMNS

TINY = {
    "num_streams": 2,
    "tx_atoms": 4,
    "rx_atoms": 4,
    "tx_layers": 2,
    "rx_layers": 2,
    "trials": 2,
    "axis_values": [1.0, 2.0],
    "rmax": {"max_outer_iters": 2, "manifold": {"max_iters": 5}},
    "imin": {"max_sweeps": 3},
}


def tiny_config(**changes):
    data = json.loads(json.dumps(TINY))
    data.update(changes)
    return config_from_dict(data)


class TestSeeds(unittest.TestCase):

    def test_trial_seeds(self):
        self.assertEqual(sweeps.trial_seed(0, 1, 2), sweeps.trial_seed(0, 1, 2))
        seeds = {sweeps.trial_seed(0, i, t) for i in range(4) for t in range(25)}
        self.assertEqual(len(seeds), 100)
        self.assertNotEqual(sweeps.trial_seed(0, 0, 0), sweeps.trial_seed(1, 0, 0))
        self.assertTrue(all(0 <= s < 2 ** 64 for s in seeds))

    def test_purposes_differ(self):
        seed = sweeps.trial_seed(3, 0, 0)
        self.assertNotEqual(sweeps.purpose_seed(seed, 0), sweeps.purpose_seed(seed, 1))


class TestConfig(unittest.TestCase):

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            config_from_dict({"num_stream": 2})

    def test_wrong_type(self):
        with pytest.raises(ConfigError):
            config_from_dict({"trials": "many"})

    def test_invalid_values(self):
        for bad in ({"trials": 0}, {"algorithms": ["sgd"]}, {"axis": "distance"}, {"axis_values": [1.5]},
                    {"rmax": {"rate_tolerance": 0.0}}):
            with pytest.raises(ConfigError):
                config_from_dict(bad)

    def test_precedence(self):
        cfg = load_config(preset="desk")
        self.assertEqual(cfg.tx_atoms, PRESETS["desk"]["tx_atoms"])
        cfg = load_config(preset="desk", overrides={"trials": 3, "seed": 9})
        self.assertEqual((cfg.trials, cfg.seed, cfg.tx_atoms), (3, 9, 25))

    def test_unknown_preset_and_missing_file(self):
        with pytest.raises(ConfigError):
            load_config(preset="huge")
        with pytest.raises(ConfigError):
            load_config("/nonexistent/cfg.json")

    def test_model_config_axis(self):
        cfg = tiny_config()
        self.assertEqual(cfg.model_config("layers", 3.0).rx_layers, 3)
        self.assertEqual(cfg.model_config("thickness", 0.05).tx_thickness, 0.05)
        self.assertEqual(cfg.model_config().tx_layers, 2)
        for bad in (1.5, 0.0):
            with pytest.raises(ConfigError):
                cfg.model_config("layers", bad)


class TestCli(unittest.TestCase):

    def test_overrides(self):
        args = utils.cli.parse_args(argv=["-l", "debug", "run-once", "--seed", "5",
                                          "--algo", "imin", "--algo", "imin", "--threads", "2"])
        self.assertEqual(args.logLevel, "debug")
        self.assertEqual(args.command, "run-once")
        self.assertEqual(utils.cli.overrides_from_args(args), {"seed": 5, "algorithms": ["imin"], "threads": 2})

    def test_validation(self):
        with pytest.raises(ConfigError):
            utils.cli.parse_args(do_validation=True, argv=["sweep-layers", "--config", "/nonexistent.json"])
        with pytest.raises(ConfigError):
            utils.cli.parse_args(do_validation=True, argv=["sweep-layers", "--seed", "-1"])
        args = utils.cli.parse_args(do_validation=True, argv=["self-check"])
        self.assertEqual(args.command, "self-check")

    def test_unknown_algorithm(self):
        with pytest.raises(SystemExit):
            utils.cli.parse_args(argv=["run-once", "--algo", "sgd"])

    def test_trace_belongs_to_run_once(self):
        args = utils.cli.parse_args(argv=["run-once", "--trace", "t.csv"])
        self.assertEqual(utils.cli.overrides_from_args(args), {"trace": "t.csv"})
        for command in ("sweep-layers", "sweep-thickness"):
            with pytest.raises(SystemExit):
                utils.cli.parse_args(argv=[command, "--trace", "t.csv"])
        args = utils.cli.parse_args(argv=["sweep-layers", "--seed", "3"])
        self.assertEqual(utils.cli.overrides_from_args(args), {"seed": 3})


def write_config(path, data):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f)
    return str(path)


def test_file_sits_between_preset_and_flags(tmp_path):
    config = write_config(tmp_path / "cfg.json", {"trials": 4, "tx_power_dbm": 10})
    cfg = load_config(config, "full", {"trials": 5})
    assert cfg.trials == 5
    assert cfg.tx_power_dbm == 10.0
    assert cfg.tx_layers == 7


def test_main_bad_config_exits_2(tmp_path):
    config = write_config(tmp_path / "bad.json", {"bogus": 1})
    args = utils.cli.parse_args(argv=["run-once", "--config", config])
    assert sim_rate.main(args) == 2
    assert state.g_pool is None


def test_main_prints_aggregate(tmp_path, capsys):
    config = write_config(tmp_path / "tiny.json", TINY)
    args = utils.cli.parse_args(argv=["run-once", "--config", config, "--algo", "imin"])
    assert sim_rate.main(args) == 0
    out = capsys.readouterr().out.strip().split("\t")
    assert out[1] == "imin"
    assert out[-1] == "1"


def test_sweep_csv_is_reproducible(tmp_path):
    config = write_config(tmp_path / "tiny.json", TINY)
    outputs = []
    for run, threads in enumerate(("1", "2")):
        out = tmp_path / f"run{run}" / "results.csv"
        args = utils.cli.parse_args(argv=["sweep-layers", "--config", config, "--out", str(out),
                                          "--threads", threads])
        assert sim_rate.main(args) == 0
        outputs.append((out.read_bytes(), writers.aggregate_path(out).read_bytes()))

    assert outputs[0] == outputs[1]
    lines = outputs[0][0].decode("utf-8").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    # 2 axis values x 2 trials x 3 algorithms
    assert len(lines) == 1 + 12
    assert all(line.endswith(",0.0") for line in lines[1:])


def test_main_thickness_sweep_needs_thickness_axis(tmp_path):
    config = write_config(tmp_path / "tiny.json", TINY)
    args = utils.cli.parse_args(argv=["sweep-thickness", "--config", config])
    assert sim_rate.main(args) == 2
    assert state.g_pool is None


def test_sweep_ignores_trace_from_config(tmp_path, caplog):
    trace = tmp_path / "trace.csv"
    config = write_config(tmp_path / "tiny.json", dict(TINY, trials=1, axis_values=[1.0], algorithms=["imin"],
                                                       trace=str(trace)))
    args = utils.cli.parse_args(argv=["sweep-layers", "--config", config])
    assert sim_rate.main(args) == 0
    assert not trace.exists()
    assert any("only written by run-once" in r.getMessage() for r in caplog.records)


def test_run_once_traces(tmp_path):
    config = write_config(tmp_path / "tiny.json", TINY)
    trace = tmp_path / "trace.csv"
    args = utils.cli.parse_args(argv=["run-once", "--config", config, "--trace", str(trace),
                                      "--algo", "rmax-random", "--algo", "hybrid"])
    assert sim_rate.main(args) == 0
    for algo in ("rmax-random", "hybrid"):
        lines = (tmp_path / f"trace.{algo}.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(TRACE_COLUMNS)
        assert len(lines) >= 2


class TestSweeps(unittest.TestCase):

    @classmethod
    def tearDownClass(cls):
        state.shutdown_pool()

    def test_thickness_matches_layers(self):
        by_layers = sweeps.sweep_layers(tiny_config(axis_values=[2.0]))
        by_thickness = sweeps.sweep_thickness(tiny_config(axis="thickness", axis_values=[0.1]))
        self.assertEqual([r.seed for r in by_layers.rows], [r.seed for r in by_thickness.rows])
        np.testing.assert_allclose([r.rate_bps_hz for r in by_layers.rows],
                                   [r.rate_bps_hz for r in by_thickness.rows], rtol=1e-12)

    def test_axis_must_match_the_sweep(self):
        with pytest.raises(ConfigError):
            sweeps.sweep_layers(tiny_config(axis="thickness", axis_values=[1.5, 2.5]))
        with pytest.raises(ConfigError):
            sweeps.sweep_thickness(tiny_config())

    def test_single_trial_has_zero_spread(self):
        result = sweeps.sweep_layers(tiny_config(trials=1, axis_values=[1.0], algorithms=["imin"]))
        (agg,) = result.aggregate()
        self.assertEqual((agg.n, agg.std_rate), (1, 0.0))

    def test_rows_are_ordered(self):
        result = sweeps.sweep_layers(tiny_config(algorithms=["hybrid", "imin"]))
        keys = [(r.axis_value, r.trial, r.algo) for r in result.rows]
        self.assertEqual(keys, [(v, t, a) for v in (1.0, 2.0) for t in (0, 1) for a in ("imin", "hybrid")])

    def test_hybrid_without_refinement_equals_imin(self):
        cfg = tiny_config(algorithms=["imin", "hybrid"], rmax={"max_outer_iters": 0})
        model = sweeps.SimModel(cfg.model_config())
        problem, init = sweeps.draw_trial(model, sweeps.trial_seed(0, 0, 0))
        results = sweeps.solve_all(problem, init, cfg)
        self.assertEqual(results["hybrid"].rate, results["imin"].rate)
        self.assertIs(results["hybrid"].stage, results["imin"])

    def test_hybrid_never_loses_to_its_stage(self):
        cfg = tiny_config(algorithms=["imin", "hybrid"])
        model = sweeps.SimModel(cfg.model_config())
        for t in range(3):
            problem, init = sweeps.draw_trial(model, sweeps.trial_seed(1, 0, t))
            results = sweeps.solve_all(problem, init, cfg)
            self.assertGreaterEqual(results["hybrid"].rate, results["imin"].rate - 1e-9)


class TestWriters(unittest.TestCase):

    def test_paths(self):
        self.assertEqual(str(writers.aggregate_path("out/results.csv")), "out/results.agg.csv")
        self.assertEqual(str(writers.trace_path("t.csv", "imin", False)), "t.csv")
        self.assertEqual(str(writers.trace_path("t.csv", "imin", True)), "t.imin.csv")

    def test_population_std(self):
        rows = [TrialRow(axis_name="layers", axis_value=1.0, trial=t, seed=t, algo="imin", rate_bps_hz=r,
                         interference=0.0, outer_iters=1, wall_ms=0.0) for t, r in enumerate((1.0, 3.0))]
        result = SweepResult(axis_name="layers", axis_values=[1.0], algorithms=["imin"], trials=2, rows=rows)
        (agg,) = result.aggregate()
        self.assertEqual((agg.mean_rate, agg.std_rate, agg.n), (2.0, 1.0, 2))


def test_self_check_passes():
    report = selfcheck.self_check()
    assert report.passed, report.show()
