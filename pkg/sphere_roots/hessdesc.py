"""Hessian Descent: step along negative tangent curvature, then project back."""

from __future__ import annotations

import math
import sys as _sys
from dataclasses import dataclass, field

import numpy as np

from sphere_roots.newton import CertReport, certify
from sphere_roots.params import HDConfig
from sphere_roots.polysys import (
    PolynomialSystem,
    energy,
    energy_hessian,
    tangent_basis,
)
from sphere_roots.spectral import DegenerateDirectionError, find_descent_direction
from sphere_roots.verify import dense_symmetric_eigen


class NoNegativeCurvature(ValueError):
    """The restricted Hessian is numerically positive semidefinite."""


def hd_equation_count(d: int, A: float = 1.0) -> int:
    """n = floor(d - A sqrt(d log d)), kept within [1, d - 1]."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    n = math.floor(d - A * math.sqrt(d * math.log(d)))
    return min(max(n, 1), d - 1)


def hd_budget(d: int, p_max: int, C0_prime: float) -> int:
    """C0' d^{3/2} p^4 (log p)^2 iterations."""
    return math.ceil(C0_prime * d**1.5 * p_max**4 * math.log(p_max) ** 2)


def hd_step_size(h: float, d: int, n: int, p_max: int, C1: float) -> float:
    inner = (1.0 / (30.0 * C1)) * (1.0 / (p_max**4 * math.log(p_max))) * math.sqrt((d - n) * h) / d
    return math.sqrt(min(inner, 1.0 / p_max))


@dataclass
class HDStep:
    point: np.ndarray
    delta: float
    sign: int
    direction: np.ndarray
    pre_projection_energy: float
    energy: float
    fallback: bool = False


def _direction(sys: PolynomialSystem, x: np.ndarray, cfg: HDConfig) -> tuple[np.ndarray, bool]:
    hess = energy_hessian(sys, x)
    try:
        v = find_descent_direction(sys, x, cfg.power, cfg.C1, hess=hess)
        if float(v @ hess @ v) < 0:
            return v, False
    except DegenerateDirectionError:
        pass
    u = tangent_basis(x)
    vals, vecs = dense_symmetric_eigen(u.T @ hess @ u)
    if vals[0] >= 0:
        raise NoNegativeCurvature(f"smallest restricted Hessian eigenvalue is {vals[0]:.3e}")
    v = u @ vecs[:, 0]
    return v / np.linalg.norm(v), True


def hd_step(sys: PolynomialSystem, x, cfg: HDConfig | None = None) -> HDStep:
    """x_{i+1} = (x - s delta v) / |x - s delta v| with sign(0) = +1."""
    cfg = cfg or HDConfig()
    x = np.asarray(x, dtype=np.float64)
    if abs(float(np.linalg.norm(x)) - 1.0) > 1e-10:
        raise ValueError("hd_step needs a unit vector")
    h = energy(sys, x)
    if h <= 0.0:
        raise ValueError("hd_step needs H(x) > 0")
    v, fallback = _direction(sys, x, cfg)
    delta = hd_step_size(h, sys.d, sys.n, sys.p_max, cfg.C1)
    sign = 1 if energy(sys, x + delta * v) - energy(sys, x - delta * v) >= 0 else -1
    y = x - sign * delta * v
    point = y / np.linalg.norm(y)
    return HDStep(point, delta, sign, v, energy(sys, y), energy(sys, point), fallback)


@dataclass
class HDResult:
    outcome: np.ndarray | None
    iterations: int
    energy_trace: list[float] = field(default_factory=list)
    step_trace: list[float] = field(default_factory=list)
    pre_projection_trace: list[float] = field(default_factory=list)
    fallback_steps: int = 0
    budget: int = 0
    energy_floor: float = 0.0
    certification: CertReport | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "outcome": None if self.outcome is None else self.outcome.tolist(),
            "iterations": self.iterations,
            "budget": self.budget,
            "energy_floor": self.energy_floor,
            "final_energy": self.energy_trace[-1] if self.energy_trace else None,
            "fallback_steps": self.fallback_steps,
            "energy_trace": list(self.energy_trace),
            "pre_projection_trace": list(self.pre_projection_trace),
            "reason": self.reason,
            "certification": None if self.certification is None else self.certification.to_dict(),
        }


def hd_run(
    sys: PolynomialSystem,
    cfg: HDConfig | None = None,
    x0=None,
    quiet: bool = True,
) -> HDResult:
    """Run Hessian Descent from e_1 until H drops below the floor or the budget runs out."""
    cfg = cfg or HDConfig()
    d, n, p = sys.d, sys.n, sys.p_max
    if n > d - 1:
        raise ValueError(f"Hessian Descent needs n <= d - 1, got n={n}, d={d}")
    x = np.eye(d)[0] if x0 is None else np.asarray(x0, dtype=np.float64)
    floor = cfg.resolved_energy_floor(d, p)
    budget = cfg.max_iters if cfg.max_iters is not None else hd_budget(d, p, cfg.C0_prime)
    result = HDResult(None, 0, [energy(sys, x)], budget=budget, energy_floor=floor)

    if result.energy_trace[0] <= floor:
        result.outcome = x
        result.reason = "initial point below energy floor"
    else:
        for i in range(budget):
            try:
                step = hd_step(sys, x, cfg)
            except NoNegativeCurvature as e:
                result.reason = f"no negative curvature: {e}"
                break
            x = step.point
            result.iterations = i + 1
            result.energy_trace.append(step.energy)
            result.step_trace.append(step.delta)
            result.pre_projection_trace.append(step.pre_projection_energy)
            result.fallback_steps += step.fallback
            if not quiet and (i + 1) % 500 == 0:
                print(f"\r  hd: {i + 1}/{budget}  H={step.energy:.3e}", end="", file=_sys.stderr)
            if step.energy <= floor:
                result.outcome = x
                result.reason = "energy floor reached"
                break
        else:
            result.reason = "iteration budget exhausted"
        if not quiet:
            print(file=_sys.stderr)

    if result.outcome is not None:
        result.certification = certify(sys, result.outcome, cfg.cert)
    return result
