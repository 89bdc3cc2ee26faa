"""Tests for regime selection and dispatch."""

import json
import math

import numpy as np
import pytest

from sphere_roots.driver import REGIMES, dispatch, regime, regime_u
from sphere_roots.params import SolverConfig
from sphere_roots.polysys import HomogeneousPoly, PolynomialSystem, sample_system
from sphere_roots.report import strip_timings


def _reference_regime(d, p, delta, C=1.0):
    if p < d * d:
        return "Λ1" if C * math.exp(-d / C) < delta else "Λ2"
    return "Λ3" if p ** (-d) < delta else "Λ4"


class TestRegime:
    """The four dispatch sets."""

    @pytest.mark.parametrize("d, p, delta, expected", [
        (50, 3, 0.1, "Λ1"),
        (3, 2, 0.01, "Λ2"),
        (2, 16, 0.1, "Λ3"),
        (2, 4, 0.01, "Λ4"),
    ])
    def test_examples(self, d, p, delta, expected):
        assert regime(d, p, delta) == expected

    def test_matches_direct_predicates(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            d = int(rng.integers(1, 30))
            p = int(rng.integers(2, 60))
            delta = float(rng.uniform(0.001, 0.99))
            reg = regime(d, p, delta)
            assert reg in REGIMES
            assert reg == _reference_regime(d, p, delta)

    def test_huge_dimension_stays_finite(self):
        assert regime(10**6, 3, 0.1) == "Λ1"
        assert regime(3, 10**9, 1e-20) == "Λ3"
        assert regime(3, 10**9, 1e-300) == "Λ4"

    @pytest.mark.parametrize("args", [(0, 3, 0.1), (3, 1, 0.1), (3, 3, 0.0), (3, 3, 1.0)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            regime(*args)


class TestRegimeU:
    """MSS parameters per regime."""

    def test_large_degree_formulas(self):
        u1, u2, u3 = regime_u("Λ3", 2, 16, SolverConfig())
        assert u1 == pytest.approx(1 + math.sqrt(math.log(6) / 2 + math.log(16)))
        assert u2 == pytest.approx(1 / 768)
        assert u3 == pytest.approx(256 * (2 * math.log(16) + 10) / 3)

    def test_finite_regimes_use_config(self):
        cfg = SolverConfig(u1=1.5, u2=0.3, u3=50.0)
        assert regime_u("Λ2", 3, 2, cfg) == (1.5, 0.3, 50.0)
        assert regime_u("Λ4", 2, 4, cfg) == (1.5, 0.3, 50.0)

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="floating range"):
            regime_u("Λ3", 400, 10**6, SolverConfig())


class TestDispatch:
    """End-to-end dispatch on small inputs."""

    def test_given_system_warns_and_uses_hd(self, capsys):
        sys = sample_system(3, [2], 4)
        cfg = SolverConfig(delta=0.01, hd_max_iters=50)
        report = dispatch(system=sys, cfg=cfg)
        assert report.regime == "Λ2"
        assert report.algorithm == "hd"
        assert report.n == 1
        assert len(report.warnings) == 1
        assert "Hessian Descent" in report.warnings[0]
        assert "warning:" in capsys.readouterr().err

    def test_mss_needs_square_system(self):
        with pytest.raises(ValueError, match="n = d - 1"):
            dispatch(system=sample_system(3, [2], 0), cfg=SolverConfig(mode="mss"))

    def test_hd_needs_fewer_equations(self):
        with pytest.raises(ValueError, match="n <= d - 1"):
            dispatch(system=sample_system(2, [2, 2], 0), cfg=SolverConfig(mode="hd"))

    def test_missing_inputs(self):
        with pytest.raises(ValueError):
            dispatch(d=3)

    def test_generate_mss(self):
        cfg = SolverConfig(mode="mss", k0_override=6, max_blocks=20000)
        report = dispatch(d=3, degrees=[2], cfg=cfg)
        assert report.algorithm == "mss"
        assert report.n == 2
        assert report.input["kind"] == "generation"
        assert report.input["degrees"] == [2, 2]
        assert report.parameters["k0"] == 6
        assert report.parameters["log_block_budget"] == pytest.approx(
            2 * (math.log(report.parameters["L"]) + 0.5 * math.log(3) + 6 * math.log(2))
        )
        assert 0.0 <= report.failure_bound <= 1.0
        assert report.stats["blocks_visited"] <= 20000
        assert set(report.timings) == {"generate", "solve"}
        if report.outcome is not None:
            assert np.linalg.norm(report.outcome) == pytest.approx(1.0)
            assert report.certification is not None

    def test_generate_hd_uses_hd_equation_count(self):
        report = dispatch(d=6, degrees=[2, 3], cfg=SolverConfig(hd_max_iters=20))
        assert report.regime == "Λ1"
        assert report.algorithm == "hd"
        assert report.n == 2
        assert report.input["degrees"] == [2, 3]
        assert report.parameters["budget"] == 20
        assert report.failure_bound is None

    def test_generate_hd_seeds_from_hd_config(self):
        cfg = SolverConfig(hd_max_iters=5, seed=17)
        report = dispatch(d=6, degrees=[2], cfg=cfg)
        assert cfg.hd_config().seed == 17
        assert report.input["seed"] == 17
        assert report.parameters["seed"] == 17

    def test_deterministic(self):
        cfg = SolverConfig(hd_max_iters=100, seed=3)
        a = dispatch(d=6, degrees=[2], cfg=cfg).to_dict()
        b = dispatch(d=6, degrees=[2], cfg=cfg).to_dict()
        assert strip_timings(a) == strip_timings(b)
        assert a["kind"] == "run"
        assert a["schema_version"] == 1
        json.dumps(a)

    def test_given_root_reported(self):
        sys = PolynomialSystem((HomogeneousPoly.from_terms(3, {(1, 1, 0): 1.0}),))
        report = dispatch(system=sys, cfg=SolverConfig(mode="hd"))
        assert report.outcome == [1.0, 0.0, 0.0]
        assert report.reason == "initial point below energy floor"
        assert report.certification["certified"] is True
