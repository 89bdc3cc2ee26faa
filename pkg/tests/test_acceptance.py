"""Long-running ensemble checks. Run with `pytest -m slow`."""

import math
import time

import numpy as np
import pytest

from sphere_roots.mss import mss_params, mss_run
from sphere_roots.monte_carlo import rootcount, solve_ensemble, spawn_seeds
from sphere_roots.params import MSSRunConfig, SolverConfig
from sphere_roots.polysys import evaluate, sample_system
from sphere_roots.verify import circle_roots, mc_covariance, sphere_scan_roots

pytestmark = pytest.mark.slow


class TestHessianDescentAtScale:
    """d = 40, cubic equations, n from the default equation count."""

    @pytest.fixture(scope="class")
    def ensemble(self):
        cfg = SolverConfig(mode="hd", C1=0.05, energy_floor=1e-10)
        started = time.perf_counter()
        reports = solve_ensemble(40, [3], spawn_seeds(0, 20), cfg, workers=4, processes=True)
        return reports, time.perf_counter() - started

    @pytest.fixture(scope="class")
    def reports(self, ensemble):
        return ensemble[0]

    def test_most_runs_reach_the_floor(self, reports):
        solved = 0
        for report in reports:
            assert report.n == 27
            if report.outcome is not None:
                solved += 1
                assert report.stats["final_energy"] <= 1e-10
                assert report.certification["certified"]
        assert solved >= 18

    def test_projection_never_raises_energy(self, reports):
        for report in reports:
            trace = report.stats["energy_trace"]
            for pre, post in zip(report.stats["pre_projection_trace"], trace[1:]):
                assert post <= pre

    def test_energy_decreases_on_almost_every_step(self, reports):
        steps = decreases = 0
        for report in reports:
            trace = report.stats["energy_trace"]
            steps += len(trace) - 1
            decreases += sum(b <= a for a, b in zip(trace, trace[1:]))
        assert decreases >= 0.99 * steps

    def test_total_wall_time(self, ensemble):
        assert ensemble[1] < 600


class TestMultiScaleAgainstOracle:
    """Returned points lie near a root the brute-force scan also finds."""

    @pytest.mark.parametrize("d, degrees", [(2, [3]), (3, [2, 2]), (3, [2, 3])])
    def test_agreement(self, d, degrees):
        params = mss_params(d, max(degrees), 1.1, 0.5, 1e3, 0.1, C0=3.0)
        agree = 0
        for seed in range(50):
            sys = sample_system(d, degrees, seed)
            oracle = circle_roots(sys, grid_size=20000) if d == 2 else sphere_scan_roots(sys, resolution=0.02)
            res = mss_run(sys, params, MSSRunConfig(max_blocks=2_000_000))
            if res.outcome is None:
                agree += len(oracle) == 0
                continue
            assert np.linalg.norm(res.outcome) == pytest.approx(1.0)
            tol = 2 * math.sqrt(d) * 2.0 ** -params.k0 * params.L
            assert np.linalg.norm(evaluate(sys, res.outcome)) <= tol
            limit = np.array(res.certification.limit) if res.certification.limit else res.outcome
            agree += any(np.linalg.norm(limit - r) < 1e-6 for r in oracle.roots)
        assert agree >= 48


class TestKacRice:
    """Mean root count on the circle within 5% of 2 sqrt(p)."""

    @pytest.mark.parametrize("degree", [2, 3, 5])
    def test_mean_count(self, degree):
        res = rootcount(2, degree, trials=2000, seed=degree, workers=4)
        assert res.target == pytest.approx(2 * math.sqrt(degree))
        assert res.relative_error < 0.05


class TestCovariance:
    """E[F(x)F(y)] = <x,y>^p to within 3 standard errors at 10^5 samples."""

    def test_overlaps(self):
        pairs = [
            ([1.0, 0.0, 0.0], [t, math.sqrt(1 - t * t), 0.0])
            for t in (-1.0, 0.0, 0.5, 1.0)
        ]
        report = mc_covariance(3, 4, pairs, samples=100_000, seed=11)
        for row in report.rows:
            assert abs(row.mean - row.target) <= 3 * row.se + 1e-12
