"""Projected Newton's method on the sphere and approximate-solution certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sphere_roots.params import THRESHOLD_FLOOR, CertConfig
from sphere_roots.polysys import (
    PolynomialSystem,
    evaluate,
    jacobian,
    tangent_basis,
)

UNIT_CHECK_TOL = 1e-10


def jacobi_svd(
    a,
    tol: float = 1e-15,
    max_sweeps: int = 60,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD by one-sided (Hestenes) Jacobi rotations.

    Returns (U, s, Vt) with s sorted in decreasing order and
    min(M, L) singular values. Wide inputs are handled through the
    transpose so rotations always act on the shorter side.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    transpose = a.shape[0] < a.shape[1]
    g = a.T.copy() if transpose else a.copy()
    cols = g.shape[1]
    v = np.eye(cols)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = g[:, p] @ g[:, p]
                beta = g[:, q] @ g[:, q]
                gamma = g[:, p] @ g[:, q]
                if gamma == 0.0 or abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                gp = g[:, p].copy()
                g[:, p] = c * gp - s * g[:, q]
                g[:, q] = s * gp + c * g[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    sigma = np.linalg.norm(g, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, g, v = sigma[order], g[:, order], v[:, order]
    u = np.zeros_like(g)
    live = sigma > 0
    u[:, live] = g[:, live] / sigma[live]
    if transpose:
        return v, sigma, u.T
    return u, sigma, v.T


def _check_unit(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if abs(float(np.linalg.norm(x)) - 1.0) > UNIT_CHECK_TOL:
        raise ValueError(f"point must lie on the unit sphere, |x| = {np.linalg.norm(x)!r}")
    return x


@dataclass
class NewtonStepResult:
    next: np.ndarray
    step: np.ndarray
    sigma_min_tangent: float
    degenerate: bool


def newton_step(
    sys: PolynomialSystem,
    x,
    rank_tol: float = 1e-10,
    sigma_floor: float = THRESHOLD_FLOOR,
) -> NewtonStepResult:
    """One projected Newton step: minimum-norm tangent solve, then renormalize."""
    x = _check_unit(x)
    u_x = tangent_basis(x)
    f = evaluate(sys, x)
    m = jacobian(sys, x) @ u_x
    u, s, vt = jacobi_svd(m)
    sigma_min = float(s[-1]) if s.size else 0.0
    if not s.size or sigma_min < sigma_floor:
        return NewtonStepResult(x.copy(), np.zeros_like(x), sigma_min, True)
    keep = s > rank_tol * s[0]
    coef = vt[keep].T @ ((u[:, keep].T @ -f) / s[keep])
    v = u_x @ coef
    if not np.any(v):
        return NewtonStepResult(x.copy(), v, sigma_min, False)
    y = x + v
    return NewtonStepResult(y / np.linalg.norm(y), v, sigma_min, False)


@dataclass
class NewtonTrajectory:
    points: list[np.ndarray]
    residuals: list[float]
    degenerate: bool = False
    reason: str = ""

    @property
    def limit(self) -> np.ndarray:
        return self.points[-1]


def newton_iterate(
    sys: PolynomialSystem,
    x0,
    max_iters: int,
    rank_tol: float = 1e-10,
    residual_floor: float = 1e-13,
    sigma_floor: float = THRESHOLD_FLOOR,
) -> NewtonTrajectory:
    x = _check_unit(x0)
    traj = NewtonTrajectory([x], [float(np.linalg.norm(evaluate(sys, x)))])
    for _ in range(max_iters):
        if traj.residuals[-1] <= residual_floor:
            traj.reason = "residual floor"
            return traj
        step = newton_step(sys, x, rank_tol, sigma_floor)
        if step.degenerate:
            traj.degenerate = True
            traj.reason = "degenerate jacobian"
            return traj
        moved = float(np.linalg.norm(step.next - x))
        x = step.next
        traj.points.append(x)
        traj.residuals.append(float(np.linalg.norm(evaluate(sys, x))))
        if moved <= THRESHOLD_FLOOR:
            traj.reason = "stalled"
            return traj
    traj.reason = "max iterations"
    return traj


def contraction_exponents(residuals: list[float], floor: float = 1e-13) -> list[float]:
    """log r_{i+1} / log r_i over consecutive residuals in (floor, 1)."""
    out = []
    for r0, r1 in zip(residuals, residuals[1:]):
        if floor < r1 and floor < r0 < 1.0 and r1 < 1.0:
            out.append(math.log(r1) / math.log(r0))
    return out


@dataclass
class CertReport:
    certified: bool
    mode: str
    label: str
    B_bound: float | None = None
    residual_trace: list[float] = field(default_factory=list)
    contraction_exponents: list[float] = field(default_factory=list)
    sigma_min: float | None = None
    distance_bound: float | None = None
    limit: list[float] | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "certified": self.certified,
            "mode": self.mode,
            "label": self.label,
            "B_bound": self.B_bound,
            "residual_trace": list(self.residual_trace),
            "contraction_exponents": list(self.contraction_exponents),
            "sigma_min": self.sigma_min,
            "distance_bound": self.distance_bound,
            "limit": self.limit,
            "reason": self.reason,
        }


def _tangent_sigma_min(sys: PolynomialSystem, x: np.ndarray) -> float:
    s = jacobi_svd(jacobian(sys, x) @ tangent_basis(x))[1]
    return float(s[-1]) if s.size else 0.0


def _certify_analytic(sys: PolynomialSystem, x: np.ndarray, cfg: CertConfig) -> CertReport:
    d, p = sys.d, sys.p_max
    f = evaluate(sys, x)
    norm_f = float(np.linalg.norm(f))
    report = CertReport(False, "analytic", "heuristic-analytic", residual_trace=[0.5 * norm_f**2])
    sigma = _tangent_sigma_min(sys, x)
    report.sigma_min = sigma
    if sigma < cfg.sigma_floor:
        report.reason = "degenerate jacobian at x"
        return report
    lip = cfg.lipschitz if cfg.lipschitz is not None else cfg.C0 * p**2 * math.sqrt(d * math.log(p))
    euler = p * norm_f
    dist = 2.0 * norm_f / sigma
    report.distance_bound = dist
    t = sigma - 5.0 * lip * dist
    if t <= 0:
        report.reason = "surrogate T is not positive"
        return report
    report.B_bound = 3.0 + (8.0 * lip + 4.0 * euler) / t
    report.certified = dist <= 1.0 / (4.0 * report.B_bound)
    report.reason = "distance surrogate within 1/(4B)" if report.certified else "distance surrogate exceeds 1/(4B)"
    return report


def _certify_empirical(sys: PolynomialSystem, x: np.ndarray, cfg: CertConfig) -> CertReport:
    sigma = _tangent_sigma_min(sys, x)
    if sigma < cfg.sigma_floor:
        norm_f = float(np.linalg.norm(evaluate(sys, x)))
        return CertReport(
            False, "empirical", "empirical",
            residual_trace=[0.5 * norm_f**2],
            sigma_min=sigma,
            limit=x.tolist(),
            reason="degenerate jacobian at x",
        )
    traj = newton_iterate(sys, x, cfg.steps, cfg.rank_tol, cfg.residual_floor, cfg.sigma_floor)
    report = CertReport(
        False, "empirical", "empirical",
        residual_trace=[0.5 * r * r for r in traj.residuals],
        contraction_exponents=contraction_exponents(traj.residuals, cfg.residual_floor),
        sigma_min=sigma,
        limit=traj.limit.tolist(),
    )
    if traj.degenerate:
        report.reason = "degenerate jacobian along the trajectory"
        return report
    if traj.residuals[-1] > cfg.root_tol:
        report.reason = f"trajectory limit is not a root (|F| = {traj.residuals[-1]:.3e})"
        return report
    limit = traj.limit
    e0 = float(np.linalg.norm(traj.points[0] - limit))
    report.distance_bound = e0
    for i, pt in enumerate(traj.points):
        bound = max(cfg.slack * math.ldexp(e0, 1 - 2**i), THRESHOLD_FLOOR)
        if float(np.linalg.norm(pt - limit)) > bound:
            report.reason = f"contraction violated at step {i}"
            return report
    report.certified = True
    report.reason = "doubly exponential contraction observed"
    return report


def certify(
    sys: PolynomialSystem,
    x,
    cfg: CertConfig | None = None,
    mode: str | None = None,
) -> CertReport:
    """Decide whether x is an approximate solution."""
    cfg = cfg or CertConfig()
    mode = mode or cfg.mode
    x = _check_unit(x)
    if mode == "analytic":
        return _certify_analytic(sys, x, cfg)
    if mode == "empirical":
        return _certify_empirical(sys, x, cfg)
    raise ValueError(f"unknown certification mode: {mode!r}")
