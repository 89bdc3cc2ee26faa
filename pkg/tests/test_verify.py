"""Tests for the brute-force oracles and sampled surrogates."""

import math

import numpy as np
import pytest

from sphere_roots.polysys import (
    HomogeneousPoly,
    PolynomialSystem,
    evaluate,
    monomial_basis,
    sample_system,
)
from sphere_roots.verify import (
    MAX_DENSE_SIZE,
    circle_roots,
    dense_svd,
    dense_symmetric_eigen,
    kac_rice_expected_roots,
    mc_covariance,
    mc_lipschitz,
    sphere_scan_roots,
)


def _system(d, *terms):
    return PolynomialSystem(tuple(HomogeneousPoly.from_terms(d, t) for t in terms))


class TestCircleRoots:
    """Angle scan on S^1."""

    def test_axis_roots(self):
        found = circle_roots(_system(2, {(1, 1): 1.0}), grid_size=20000)
        assert len(found) == 4
        for r in found.roots:
            assert min(abs(r[0]), abs(r[1])) < 1e-9
        assert found.min_gap == pytest.approx(math.pi / 2, rel=1e-6)
        assert not found.coarse

    def test_no_roots(self):
        found = circle_roots(_system(2, {(2, 0): 1.0, (0, 2): 1.0}), grid_size=20000)
        assert len(found) == 0
        assert found.min_gap is None

    def test_roots_are_roots(self):
        for seed in range(20):
            sys = sample_system(2, [5], seed)
            found = circle_roots(sys, grid_size=20000)
            assert len(found) % 2 == 0
            for r in found.roots:
                assert abs(evaluate(sys, r)[0]) < 1e-9

    def test_wrong_shape_rejected(self):
        with pytest.raises(ValueError):
            circle_roots(sample_system(3, [2, 2], 0))

    def test_to_dict(self):
        doc = circle_roots(_system(2, {(1, 1): 1.0}), grid_size=1000).to_dict()
        assert doc["method"] == "angle-scan"
        assert doc["count"] == 4


class TestSphereScan:
    """Latitude-longitude scan on S^2."""

    def test_planted_pole_root(self):
        sys = sample_system(3, [2, 3], 12)
        polys = []
        for f in sys.polys:
            coeffs = f.coeffs.copy()
            coeffs[monomial_basis(3, f.degree).index[(0, 0, f.degree)]] = 0.0
            polys.append(HomogeneousPoly(3, f.degree, coeffs))
        planted = PolynomialSystem(tuple(polys))
        found = sphere_scan_roots(planted, resolution=0.02)
        e3 = np.array([0.0, 0.0, 1.0])
        assert any(min(np.linalg.norm(r - e3), np.linalg.norm(r + e3)) < 0.02 for r in found.roots)
        for r in found.roots:
            assert np.linalg.norm(evaluate(planted, r)) <= 1e-10

    def test_no_roots(self):
        sys = _system(
            3,
            {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0},
            {(4, 0, 0): 1.0, (0, 4, 0): 1.0, (0, 0, 4): 1.0},
        )
        assert len(sphere_scan_roots(sys, resolution=0.05)) == 0

    def test_resolution_range(self):
        with pytest.raises(ValueError):
            sphere_scan_roots(sample_system(3, [2, 2], 0), resolution=1.0)

    def test_wrong_shape_rejected(self):
        with pytest.raises(ValueError):
            sphere_scan_roots(sample_system(3, [2], 0))


class TestDense:
    """LAPACK decompositions used as references."""

    def test_eigen_of_diagonal(self):
        vals, vecs = dense_symmetric_eigen(np.diag([3.0, -1.0, 2.0]))
        np.testing.assert_allclose(vals, [-1.0, 2.0, 3.0])
        np.testing.assert_allclose(np.abs(vecs[:, 0]), [0.0, 1.0, 0.0])

    def test_eigen_matches_gram_singular_values(self):
        a = np.random.default_rng(0).standard_normal((6, 9))
        vals = dense_symmetric_eigen(a @ a.T)[0]
        sv = dense_svd(a)[1]
        np.testing.assert_allclose(vals[::-1], sv**2, rtol=1e-10)

    def test_svd_reconstruction(self):
        a = np.random.default_rng(1).standard_normal((50, 60))
        u, s, vt = dense_svd(a)
        assert np.max(np.abs(u @ np.diag(s) @ vt - a)) <= 1e-10

    def test_size_limit(self):
        with pytest.raises(ValueError):
            dense_svd(np.zeros((MAX_DENSE_SIZE + 1, 2)))

    def test_non_square_eigen_rejected(self):
        with pytest.raises(ValueError):
            dense_symmetric_eigen(np.zeros((2, 3)))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            dense_svd(np.array([[np.nan]]))


class TestCovariance:
    """E[F(x1) F(x2)] = <x1, x2>^p."""

    def test_overlaps(self):
        pairs = [
            ([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
            ([1.0, 0.0, 0.0], [0.6, 0.8, 0.0]),
            ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            ([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]),
        ]
        report = mc_covariance(3, 3, pairs, samples=4000, seed=1)
        assert [r.target for r in report.rows] == pytest.approx([1.0, 0.216, 0.0, -1.0])
        for row in report.rows:
            assert abs(row.mean - row.target) <= 4 * row.se + 1e-12
            assert abs(row.cross_mean) <= 4 * row.cross_se

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            mc_covariance(3, 2, [([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])], samples=50)

    def test_to_dict(self):
        doc = mc_covariance(2, 2, [([1.0, 0.0], [0.0, 1.0])], samples=200).to_dict()
        assert doc["rows"][0]["target"] == 0.0
        assert "z" in doc["rows"][0]


class TestLipschitz:
    """Sampled suprema are lower bounds of the true ones."""

    def test_x1x2(self):
        est = mc_lipschitz(_system(2, {(1, 1): 1.0}), samples=2000, seed=2)
        assert 0.4 <= est.sup_F <= 0.5 + 1e-12
        assert est.lip_F <= 1.0 + 1e-3
        assert est.sup_DF <= 1.0 + 1e-12

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            mc_lipschitz(sample_system(2, [2], 0), samples=10)


class TestKacRice:
    """Expected root count of square Kostlan systems."""

    @pytest.mark.parametrize("degrees", [[2], [3], [2, 3], [3, 3, 4], [5, 2, 2, 2]])
    def test_closed_form(self, degrees):
        target = kac_rice_expected_roots(degrees)
        assert target.direct == pytest.approx(2 * math.sqrt(math.prod(degrees)), rel=1e-12)
        assert target.bezout == math.prod(degrees)

    def test_invalid(self):
        with pytest.raises(ValueError):
            kac_rice_expected_roots([])
