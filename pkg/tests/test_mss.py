"""Tests for dyadic blocks and Multi-Scale Search."""

import math

import numpy as np
import pytest

from sphere_roots.mss import (
    GridBlock,
    block_geometry,
    check_floating_range,
    log_block_budget,
    may_hold_root,
    mss_failure_bound,
    mss_params,
    mss_run,
)
from sphere_roots.params import MSSRunConfig
from sphere_roots.polysys import HomogeneousPoly, PolynomialSystem, sample_system
from sphere_roots.verify import circle_roots, mc_lipschitz

SQRT_HALF = math.sqrt(0.5)


def _system(d, *terms):
    return PolynomialSystem(tuple(HomogeneousPoly.from_terms(d, t) for t in terms))


X1X2 = _system(2, {(1, 1): 1.0})


@pytest.fixture
def small_params():
    return mss_params(2, 2, 1.0, 1.0, 1.0, 1.0, 1.0)


class TestGridBlock:
    """Integer corner indices and subdivision."""

    def test_root(self):
        root = GridBlock.root(3)
        assert root.level == -1
        assert root.side == 2.0
        np.testing.assert_array_equal(root.corner, [-1.0, -1.0, -1.0])

    def test_root_children(self):
        corners = [tuple(c.corner) for c in GridBlock.root(2).children()]
        assert corners == [(-1.0, -1.0), (-1.0, 0.0), (0.0, -1.0), (0.0, 0.0)]
        assert all(c.side == 1.0 for c in GridBlock.root(2).children())

    def test_deep_children_stay_exact(self):
        block = GridBlock.from_corner((0.5, -0.25), 3)
        for _ in range(40):
            block = block.children()[-1]
        assert block.level == 43
        assert block.corner[0] == pytest.approx(0.5 + 2**-3 - 2**-43)

    def test_from_corner(self):
        block = GridBlock.from_corner((0.75, 0.5), 2)
        assert block.index == (6, 4)
        assert block.side == 0.25

    def test_off_grid_corner_rejected(self):
        with pytest.raises(ValueError):
            GridBlock.from_corner((0.3, 0.0), 1)

    def test_odd_index_rejected(self):
        with pytest.raises(ValueError):
            GridBlock(0, (1, 0))

    def test_outside_cube_rejected(self):
        with pytest.raises(ValueError):
            GridBlock(0, (2, 0))

    def test_bad_level_rejected(self):
        with pytest.raises(ValueError):
            GridBlock(-2, (0, 0))

    @pytest.mark.parametrize("level, corner", [(-1, (-1.0, -1.0, -1.0)), (0, (0.0, -1.0, 0.0)), (4, (0.25, -0.5, 0.875))])
    def test_children_partition_parent(self, level, corner):
        """Every point of the parent lies in exactly one child (half-open cells)."""
        parent = GridBlock.from_corner(corner, level)
        kids = parent.children()
        assert len({k.index for k in kids}) == 2**parent.d
        assert all(k.side == parent.side / 2 for k in kids)
        lo, hi = parent.corner, parent.corner + parent.side
        for k in kids:
            assert np.all(k.corner >= lo) and np.all(k.corner + k.side <= hi)
        pts = lo + parent.side * np.random.default_rng(level + 2).random((500, parent.d))
        for pt in pts:
            owners = sum(bool(np.all((k.corner <= pt) & (pt < k.corner + k.side))) for k in kids)
            assert owners == 1


class TestBlockGeometry:
    """Sphere intersection and the projected test point."""

    def test_root_projects_farthest_corner(self):
        geo = block_geometry(GridBlock.root(2))
        assert geo.intersects_sphere
        np.testing.assert_array_equal(geo.nearest_corner, [0.0, 0.0])
        np.testing.assert_allclose(geo.projected, [-SQRT_HALF, -SQRT_HALF])
        assert geo.diameter == pytest.approx(2 * math.sqrt(2))

    def test_positive_quadrant(self):
        geo = block_geometry(GridBlock.from_corner((0.0, 0.0), 0))
        assert geo.intersects_sphere
        np.testing.assert_allclose(geo.projected, [SQRT_HALF, SQRT_HALF])

    def test_inside_sphere(self):
        assert not block_geometry(GridBlock.from_corner((0.0, 0.0), 2)).intersects_sphere

    def test_outside_sphere(self):
        geo = block_geometry(GridBlock.from_corner((0.75, 0.75), 2))
        assert not geo.intersects_sphere
        assert geo.projected is None

    def test_crossing_block(self):
        geo = block_geometry(GridBlock.from_corner((0.75, 0.5), 2))
        assert geo.intersects_sphere
        np.testing.assert_allclose(geo.projected, np.array([0.75, 0.5]) / math.hypot(0.75, 0.5))
        assert np.linalg.norm(geo.projected) == pytest.approx(1.0)


class TestParams:
    """Grid depth, thresholds and failure surrogate."""

    def test_small_case(self, small_params):
        assert small_params.k0 == 8
        assert small_params.L == pytest.approx(2 * math.sqrt(2 * math.log(2)))
        assert small_params.S == pytest.approx(0.125)
        assert small_params.kappa >= 1.0
        assert small_params.log2_kappa == pytest.approx(math.log2(small_params.kappa))

    def test_invalid_u(self):
        with pytest.raises(ValueError):
            mss_params(2, 2, 0.5, 1.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            mss_params(2, 2, 1.0, 2.0, 1.0, 0.1)
        with pytest.raises(ValueError):
            mss_params(2, 2, 1.0, 1.0, 0.0, 0.1)

    def test_depth_grows_with_confidence(self):
        loose = mss_params(3, 3, 2.0, 0.25, 1e3, 0.5)
        tight = mss_params(3, 3, 2.0, 0.25, 1e3, 0.001)
        assert tight.k0 > loose.k0

    def test_failure_bound_clipped(self, small_params):
        bound = mss_failure_bound(small_params, 2, 2)
        assert 0.0 <= bound <= 1.0
        big = mss_params(50, 3, 3.0, 1e-6, 1e9, 0.1)
        assert mss_failure_bound(big, 50, 3) < 0.01

    def test_depth_spot_value(self):
        assert mss_params(2, 4, 1.0, 1.0, 1.0, 1.0, 1.0).k0 == 13

    def test_lipschitz_spot_value(self):
        assert mss_params(4, 2, 1.0, 1.0, 1.0, 0.1, 1.0).L == pytest.approx(3.330, abs=1e-3)

    def test_log_block_budget(self, small_params):
        expected = math.log(small_params.L) + 0.5 * math.log(2) + 8 * math.log(2)
        assert log_block_budget(small_params, 2) == pytest.approx(expected)

    def test_floating_range(self):
        params = mss_params(2000, 50, 1.0, 1.0, 1.0, 0.1)
        with pytest.raises(ValueError, match="floating range"):
            check_floating_range(params, 2000)


def _block_containing(point, level):
    side = math.ldexp(1.0, -level)
    cells = np.minimum(np.floor((point + 1.0) / side), 2 ** (level + 1) - 1)
    return GridBlock.from_corner(-1.0 + cells * side, level)


class TestPruningSoundness:
    """A block that holds a root always passes the residual test."""

    def test_roots_survive_with_sampled_lipschitz(self):
        for seed in range(30):
            sys = sample_system(2, [3], seed)
            est = mc_lipschitz(sys, samples=2000, seed=seed)
            L = 2.0 * max(est.sup_DF, est.lip_F)
            for root in circle_roots(sys, grid_size=20000).roots:
                for level in range(-1, 16):
                    block = _block_containing(root, level)
                    geo = block_geometry(block)
                    assert geo.intersects_sphere
                    assert may_hold_root(sys, geo, L), (seed, level)


class TestSearch:
    """Depth-first search on hand-built systems."""

    def test_finds_axis_root(self, small_params):
        res = mss_run(X1X2, small_params)
        assert res.reason == "terminal block accepted"
        assert res.outcome is not None
        assert np.linalg.norm(res.outcome) == pytest.approx(1.0)
        assert min(abs(res.outcome[0]), abs(res.outcome[1])) <= 2 * math.sqrt(2) * 2**-8 * small_params.L
        assert res.terminal_block.level == small_params.k0
        assert res.certification.certified

    def test_parallel_matches_sequential(self, small_params):
        seq = mss_run(X1X2, small_params)
        par = mss_run(X1X2, small_params, MSSRunConfig(workers=4))
        np.testing.assert_array_equal(seq.outcome, par.outcome)
        assert par.terminal_block == seq.terminal_block

    def test_block_budget(self, small_params):
        res = mss_run(X1X2, small_params, MSSRunConfig(max_blocks=5))
        assert res.outcome is None
        assert res.reason == "block budget exhausted"
        assert res.blocks_visited == 5

    @pytest.mark.parametrize("workers", [1, 3])
    def test_visits_start_at_root(self, small_params, workers):
        res = mss_run(X1X2, small_params, MSSRunConfig(workers=workers, record_visits=True))
        assert res.visits[0] == GridBlock.root(2)
        assert len(res.visits) == res.blocks_visited

    def test_no_root_circle(self, small_params):
        sys = _system(2, {(2, 0): 1.0, (0, 2): 1.0})
        res = mss_run(sys, small_params)
        assert res.outcome is None
        assert res.reason == "worklist exhausted"
        assert res.certification is None

    def test_no_root_sphere(self):
        sys = _system(
            3,
            {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0},
            {(4, 0, 0): 1.0, (0, 4, 0): 1.0, (0, 0, 4): 1.0},
        )
        params = mss_params(3, 4, 1.0, 1.0, 1.0, 1.0)
        res = mss_run(sys, params)
        assert res.outcome is None
        assert res.reason == "worklist exhausted"
        assert res.blocks_pruned > 0

    def test_requires_square_system(self, small_params):
        with pytest.raises(ValueError, match="n = d - 1"):
            mss_run(sample_system(3, [2], 0), small_params)

    def test_to_dict(self, small_params):
        doc = mss_run(X1X2, small_params).to_dict()
        assert doc["reason"] == "terminal block accepted"
        assert doc["terminal_block"]["level"] == 8
        assert len(doc["outcome"]) == 2
