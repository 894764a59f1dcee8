import unittest

import numpy as np
import pytest
from scipy.optimize import brentq

from utils import DomainError
from utils.cascade import PowerVector, achievable_rate
from utils.channel import make_rng
from utils.power import PowerProblem, WmmseConfig, waterfill_power, wmmse_power

TIGHT = WmmseConfig(max_iters=5000, tolerance=1e-13)


def weak_interference_channel(rng, streams, coupling=0.3):
    h = coupling * (rng.standard_normal((streams, streams)) + 1j * rng.standard_normal((streams, streams))) / np.sqrt(2)
    np.fill_diagonal(h, rng.uniform(0.8, 1.2, streams) * np.exp(1j * rng.uniform(0, 2 * np.pi, streams)))
    return h


class TestWmmse(unittest.TestCase):

    def test_single_stream(self):
        h = np.array([[0.7 - 0.2j]])
        power = wmmse_power(PowerProblem(h=h, total=2.0, noise=0.5), np.array([2.0]))
        np.testing.assert_allclose(power.p, [2.0])
        expected = np.log2(1 + abs(h[0, 0]) ** 2 * 2.0 / 0.5)
        self.assertAlmostEqual(achievable_rate(h, power), expected, places=12)

    def test_symmetric_diagonal(self):
        h = np.eye(3, dtype=complex) * 0.9
        power = wmmse_power(PowerProblem(h=h, total=3.0, noise=1.0), np.array([0.5, 1.0, 1.5]), TIGHT)
        np.testing.assert_allclose(power.p, 1.0, atol=1e-3)
        self.assertAlmostEqual(achievable_rate(h, power), 3 * np.log2(1 + 0.81), delta=1e-6)

    def test_matches_grid_search(self):
        for seed in range(5):
            rng = make_rng(100 + seed)
            h = weak_interference_channel(rng, 2)
            total, noise = 4.0, 1.0
            power = wmmse_power(PowerProblem(h=h, total=total, noise=noise), np.full(2, total / 2), TIGHT)

            grid = np.linspace(0.0, total, 1001)
            best = max(achievable_rate(h, PowerVector(p=np.array([a, total - a]), total=total, noise=noise))
                       for a in grid)
            self.assertGreater(achievable_rate(h, power), best - 1e-3)

    def test_silent_stream_is_switched_back_on(self):
        h = np.diag([1.0, 1.0]).astype(complex)
        for p0 in (np.array([4.0, 0.0]), np.array([0.0, 4.0])):
            power = wmmse_power(PowerProblem(h=h, total=4.0, noise=1.0), p0, TIGHT)
            self.assertTrue(np.all(power.p > 0))
            self.assertAlmostEqual(achievable_rate(h, power), 2 * np.log2(3.0), delta=1e-6)

    def test_silent_stream_without_restarts(self):
        rng = make_rng(150)
        h = weak_interference_channel(rng, 3, coupling=0.1)
        cfg = WmmseConfig(max_iters=5000, tolerance=1e-13, restarts=False)
        power = wmmse_power(PowerProblem(h=h, total=3.0, noise=1.0), np.array([3.0, 0.0, 0.0]), cfg)
        self.assertTrue(np.all(power.p > 0.1))

    def test_iid_channels_reach_grid_optimum(self):
        total, noise = 4.0, 1.0
        cfg = WmmseConfig(max_iters=2000, tolerance=1e-10)
        share = np.linspace(0.0, total, 4001)
        for seed in range(200):
            rng = make_rng(300 + seed)
            h = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
            g = np.abs(h) ** 2
            grid = (np.log2(1 + g[0, 0] * share / (g[0, 1] * (total - share) + noise))
                    + np.log2(1 + g[1, 1] * (total - share) / (g[1, 0] * share + noise)))
            power = wmmse_power(PowerProblem(h=h, total=total, noise=noise), np.full(2, total / 2), cfg)
            self.assertGreater(achievable_rate(h, power), grid.max() - 1e-3, f"seed {300 + seed}")

    def test_rate_sequence_non_decreasing(self):
        for seed in range(5):
            rng = make_rng(200 + seed)
            h = weak_interference_channel(rng, 4, coupling=0.6)
            history = []
            power = wmmse_power(PowerProblem(h=h, total=4.0, noise=1.0), np.full(4, 1.0), history=history)
            self.assertTrue(np.all(np.diff(history) >= -1e-9))
            self.assertGreaterEqual(achievable_rate(h, power), history[0] - 1e-9)
            self.assertAlmostEqual(power.p.sum(), 4.0, delta=1e-9 * 4.0)
            self.assertTrue(np.all(power.p >= 0))

    def test_infeasible_start(self):
        problem = PowerProblem(h=np.eye(2, dtype=complex), total=1.0, noise=1.0)
        for p0 in (np.array([0.2, 0.2]), np.array([1.5, -0.5]), np.array([1.0])):
            with pytest.raises(DomainError):
                wmmse_power(problem, p0)

    def test_invalid_problem(self):
        with pytest.raises(DomainError):
            wmmse_power(PowerProblem(h=np.eye(2, dtype=complex), total=1.0, noise=0.0), np.full(2, 0.5))


def waterfill_oracle(gains, total, noise):
    """Water level by root finding on sum(max(0, mu - noise / g)) = total."""
    floors = noise / gains[gains > 0]
    mu = brentq(lambda m: np.sum(np.maximum(0.0, m - floors)) - total, floors.min(), floors.max() + total,
                xtol=1e-15, rtol=1e-15)
    p = np.zeros_like(gains)
    p[gains > 0] = np.maximum(0.0, mu - floors)
    return p


class TestWaterfill(unittest.TestCase):

    def test_equal_gains(self):
        power = waterfill_power(np.full(4, 2.0), 8.0, 1.0)
        np.testing.assert_allclose(power.p, 2.0)

    def test_vanishing_stream(self):
        power = waterfill_power(np.array([1.0, 1e-12]), 1.0, 1.0)
        np.testing.assert_allclose(power.p, [1.0, 0.0], atol=1e-12)

    def test_zero_gain_stream_gets_nothing(self):
        power = waterfill_power(np.array([0.0, 1.0, 2.0]), 3.0, 1.0)
        self.assertEqual(power.p[0], 0.0)
        self.assertAlmostEqual(power.p.sum(), 3.0, places=12)

    def test_common_water_level(self):
        rng = make_rng(8)
        gains = rng.uniform(0.1, 3.0, 6)
        power = waterfill_power(gains, 2.0, 1.0)
        active = power.p > 0
        levels = power.p[active] + 1.0 / gains[active]
        self.assertLess(np.ptp(levels), 1e-10)
        # inactive streams have a floor above the water level
        self.assertTrue(np.all(1.0 / gains[~active] >= levels.max() - 1e-12))

    def test_bisection_and_random_oracles(self):
        rng = make_rng(9)
        for _ in range(20):
            gains = rng.uniform(0.05, 2.0, 4)
            total, noise = rng.uniform(0.5, 4.0), 1.0
            power = waterfill_power(gains, total, noise)
            np.testing.assert_allclose(power.p, waterfill_oracle(gains, total, noise), atol=1e-10)

        gains = np.array([0.3, 1.2, 0.05, 2.0])
        power = waterfill_power(gains, 1.0, 1.0)
        best = np.sum(np.log2(1 + gains * power.p))
        samples = rng.dirichlet(np.ones(4), size=1_000_000)
        self.assertGreaterEqual(best, np.max(np.sum(np.log2(1 + gains * samples), axis=1)) - 1e-12)

    def test_errors(self):
        with pytest.raises(DomainError):
            waterfill_power(np.zeros(3), 1.0, 1.0)
        with pytest.raises(DomainError):
            waterfill_power(np.array([1.0, -0.1]), 1.0, 1.0)


class TestWmmseMatchesWaterfill(unittest.TestCase):

    def test_diagonal_channels(self):
        rng = make_rng(10)
        for _ in range(50):
            gains = rng.uniform(0.5, 2.0, 4)
            h = np.diag(np.sqrt(gains)).astype(complex)
            wf = waterfill_power(gains, 4.0, 1.0)
            wm = wmmse_power(PowerProblem(h=h, total=4.0, noise=1.0), np.full(4, 1.0), TIGHT)
            self.assertAlmostEqual(achievable_rate(h, wm), achievable_rate(h, wf), delta=1e-6)
