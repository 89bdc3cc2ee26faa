"""Brute-force oracles and sampled surrogates for desk-scale checks.

Oracles deliberately avoid the solver kernels: root sets come from grid
scans polished by least squares, decompositions come from LAPACK, and
only polynomial evaluation is shared with the rest of the package.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from sphere_roots.polysys import (
    PolynomialSystem,
    evaluate,
    evaluate_many,
    jacobian,
    sample_field_values,
)

MAX_DENSE_SIZE = 200
MIN_MC_SAMPLES = 100


@dataclass
class OracleRootSet:
    roots: list[np.ndarray]
    method: str
    resolution: float
    min_gap: float | None = None
    coarse: bool = False

    def __len__(self) -> int:
        return len(self.roots)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "resolution": self.resolution,
            "count": len(self.roots),
            "roots": [r.tolist() for r in self.roots],
            "min_gap": self.min_gap,
            "coarse": self.coarse,
        }


def _circle_values(sys: PolynomialSystem, theta: np.ndarray) -> np.ndarray:
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    return evaluate_many(sys, pts)[:, 0]


def circle_roots(
    sys: PolynomialSystem,
    grid_size: int = 1_000_000,
    tol: float = 1e-13,
) -> OracleRootSet:
    """All roots of a single equation on the unit circle by angle scan."""
    if sys.d != 2 or sys.n != 1:
        raise ValueError(f"circle_roots needs d=2, n=1, got d={sys.d}, n={sys.n}")
    if grid_size < 8:
        raise ValueError(f"grid_size must be >= 8, got {grid_size}")
    step = 2.0 * math.pi / grid_size
    theta = np.arange(grid_size) * step
    g = _circle_values(sys, theta)
    sign = np.sign(g)
    exact = theta[sign == 0]
    brackets = np.nonzero(sign * np.roll(sign, -1) < 0)[0]
    lo = theta[brackets]
    hi = lo + step
    s_lo = sign[brackets]
    for _ in range(200):
        if lo.size == 0 or float(np.max(hi - lo)) <= tol:
            break
        mid = 0.5 * (lo + hi)
        same = np.sign(_circle_values(sys, mid)) == s_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    angles = np.sort(np.mod(np.concatenate([exact, 0.5 * (lo + hi)]), 2.0 * math.pi))

    kept: list[float] = []
    for a in angles:
        if not kept or a - kept[-1] > 1e-9:
            kept.append(float(a))
    if len(kept) > 1 and kept[0] + 2.0 * math.pi - kept[-1] <= 1e-9:
        kept.pop()
    min_gap = None
    if len(kept) > 1:
        gaps = np.diff(kept + [kept[0] + 2.0 * math.pi])
        min_gap = float(np.min(gaps))
    roots = [np.array([math.cos(a), math.sin(a)]) for a in kept]
    return OracleRootSet(roots, "angle-scan", step, min_gap, coarse=min_gap is not None and min_gap < 2 * step)


def _polish(sys: PolynomialSystem, x: np.ndarray, tol: float, iters: int = 50) -> tuple[np.ndarray, float]:
    """Gauss-Newton in the tangent space with least-squares steps."""
    res = float(np.linalg.norm(evaluate(sys, x)))
    for _ in range(iters):
        if res <= 1e-3 * tol:
            break
        f = evaluate(sys, x)
        jt = jacobian(sys, x) @ (np.eye(sys.d) - np.outer(x, x))
        step = np.linalg.lstsq(jt, -f, rcond=None)[0]
        y = x + step
        x = y / np.linalg.norm(y)
        res = float(np.linalg.norm(evaluate(sys, x)))
    return x, res


def sphere_scan_roots(
    sys: PolynomialSystem,
    resolution: float = 0.02,
    tol: float = 1e-10,
) -> OracleRootSet:
    """Roots of two equations on S^2 from a latitude-longitude scan."""
    if sys.d != 3 or sys.n != 2:
        raise ValueError(f"sphere_scan_roots needs d=3, n=2, got d={sys.d}, n={sys.n}")
    if not 1e-4 <= resolution <= 0.5:
        raise ValueError(f"resolution must lie in [1e-4, 0.5], got {resolution}")
    n_theta = math.ceil(math.pi / resolution) + 1
    n_phi = math.ceil(2.0 * math.pi / resolution)
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.arange(n_phi) * (2.0 * math.pi / n_phi)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    pts = np.stack([np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1)
    vals = np.linalg.norm(evaluate_many(sys, pts.reshape(-1, 3)), axis=1).reshape(n_theta, n_phi)

    inner = vals[1:-1]
    is_min = np.ones_like(inner, dtype=bool)
    for dr in (-1, 0, 1):
        rows = vals[1 + dr: n_theta - 1 + dr]
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            is_min &= inner <= np.roll(rows, -dc, axis=1)
    candidates = [pts[i + 1, j] for i, j in zip(*np.nonzero(is_min))]
    if vals[0, 0] <= vals[1].min():
        candidates.append(pts[0, 0])
    if vals[-1, 0] <= vals[-2].min():
        candidates.append(pts[-1, 0])

    roots: list[np.ndarray] = []
    for c in candidates:
        x, res = _polish(sys, np.array(c), tol)
        if res <= tol and all(np.linalg.norm(x - r) > resolution for r in roots):
            roots.append(x)
    min_gap = None
    if len(roots) > 1:
        min_gap = min(
            float(np.linalg.norm(a - b))
            for i, a in enumerate(roots) for b in roots[i + 1:]
        )
    return OracleRootSet(roots, "sphere-scan", resolution, min_gap, coarse=min_gap is not None and min_gap < 2 * resolution)


def _check_dense(a: np.ndarray) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if max(a.shape) > MAX_DENSE_SIZE:
        raise ValueError(f"dense oracle limited to {MAX_DENSE_SIZE} rows/columns, got {a.shape}")
    return a


def dense_symmetric_eigen(m) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns)."""
    m = _check_dense(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"symmetric eigensolver needs a square matrix, got {m.shape}")
    return np.linalg.eigh(0.5 * (m + m.T))


def dense_svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin singular triplets (U, s, Vt), s decreasing."""
    return np.linalg.svd(_check_dense(a), full_matrices=False)


@dataclass
class CovarianceRow:
    overlap: float
    target: float
    mean: float
    se: float
    cross_mean: float
    cross_se: float

    @property
    def z(self) -> float:
        if self.se == 0.0:
            return 0.0 if self.mean == self.target else math.inf
        return (self.mean - self.target) / self.se


@dataclass
class CovarianceReport:
    d: int
    p: int
    samples: int
    rows: list[CovarianceRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "p": self.p,
            "samples": self.samples,
            "rows": [
                {
                    "overlap": r.overlap, "target": r.target, "mean": r.mean,
                    "se": r.se, "z": r.z, "cross_mean": r.cross_mean, "cross_se": r.cross_se,
                }
                for r in self.rows
            ],
        }


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


def mc_covariance(
    d: int,
    p: int,
    pairs: Sequence[tuple[Sequence[float], Sequence[float]]],
    samples: int,
    seed: int = 0,
) -> CovarianceReport:
    """Empirical E[F(x1) F(x2)] against <x1, x2>^p, plus an independent cross term."""
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    rng = np.random.default_rng(seed)
    report = CovarianceReport(d, p, samples)
    for x1, x2 in pairs:
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        vals = sample_field_values(d, p, np.stack([x1, x2]), samples, rng)
        other = sample_field_values(d, p, x2[np.newaxis, :], samples, rng)[:, 0]
        mean, se = _mean_se(vals[:, 0] * vals[:, 1])
        cross_mean, cross_se = _mean_se(vals[:, 0] * other)
        overlap = float(x1 @ x2)
        report.rows.append(CovarianceRow(overlap, overlap**p, mean, se, cross_mean, cross_se))
    return report


@dataclass
class LipschitzEstimate:
    """Sampled lower bounds on suprema over the sphere."""

    samples: int
    sup_F: float
    sup_DF: float
    lip_F: float
    lip_DF: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _unit_rows(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    g = rng.standard_normal((count, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def mc_lipschitz(
    sys: PolynomialSystem,
    samples: int,
    seed: int = 0,
    eps: float = 1e-4,
) -> LipschitzEstimate:
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    rng = np.random.default_rng(seed)
    xs = _unit_rows(rng, samples, sys.d)
    ys = xs + eps * rng.standard_normal(xs.shape)
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)
    fx = evaluate_many(sys, xs)
    fy = evaluate_many(sys, ys)
    gaps = np.linalg.norm(xs - ys, axis=1)
    lip_f = float(np.max(np.linalg.norm(fx - fy, axis=1) / gaps))
    sup_df = 0.0
    lip_df = 0.0
    for x, y, gap in zip(xs, ys, gaps):
        jx = jacobian(sys, x)
        sup_df = max(sup_df, float(np.linalg.norm(jx, 2)))
        lip_df = max(lip_df, float(np.linalg.norm(jx - jacobian(sys, y), 2)) / gap)
    return LipschitzEstimate(
        samples=samples,
        sup_F=float(np.max(np.linalg.norm(fx, axis=1))),
        sup_DF=sup_df,
        lip_F=lip_f,
        lip_DF=lip_df,
    )


@dataclass(frozen=True)
class KacRiceTarget:
    direct: float
    bezout: float


def kac_rice_expected_roots(degrees: Sequence[int]) -> KacRiceTarget:
    """Expected sphere-root count of a Kostlan system with n = d - 1.

    `direct` evaluates Vol(S^{d-1}) * prod sqrt(p_i / 2pi) * E|det Z| for a
    square standard Gaussian Z, which simplifies to 2 * sqrt(prod p_i);
    `bezout` is prod p_i for comparison.
    """
    degrees = [int(p) for p in degrees]
    if not degrees or min(degrees) < 1:
        raise ValueError(f"invalid degrees {degrees}")
    d = len(degrees) + 1
    log_vol = math.log(2.0) + 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d)
    log_density = sum(0.5 * math.log(p / (2.0 * math.pi)) for p in degrees)
    log_det = sum(
        0.5 * math.log(2.0) + math.lgamma(0.5 * (j + 1)) - math.lgamma(0.5 * j)
        for j in range(1, d)
    )
    return KacRiceTarget(math.exp(log_vol + log_density + log_det), float(math.prod(degrees)))
