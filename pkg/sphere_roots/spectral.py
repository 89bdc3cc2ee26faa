"""Repeated-squaring spectral estimates.

All routines square a symmetric positive semidefinite matrix k = 2^s
times. Raw powers overflow after a handful of squarings, so each squaring
divides by the largest row norm and the accumulated scale is tracked as a
k-th-root logarithm:

    B^k = exp(k * log_root) * matrix,   k = 2^s.

Column k-th roots ||B^k e_i||^(1/k) are then recovered without ever
forming B^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sphere_roots.params import LOG_FLOOR, PowerIterConfig
from sphere_roots.polysys import PolynomialSystem, energy_hessian


class DegenerateDirectionError(ValueError):
    """Every column of the squared matrix fell below the floor."""


@dataclass
class SquaringResult:
    matrix: np.ndarray
    log_root: float
    squarings: int
    performed: int

    def column_roots(self) -> np.ndarray:
        """||B^k e_i||^(1/k) for every column i.

        After an early exit `matrix` holds the normalized power 2^performed,
        so its column norms are rooted with that exponent while `log_root`
        already carries the full 2^squarings scale.
        """
        inv_k = math.ldexp(1.0, -max(self.performed, 0))
        norms = np.linalg.norm(self.matrix, axis=0)
        out = np.zeros_like(norms)
        live = norms > 0
        if math.isinf(self.log_root) and self.log_root < 0:
            return out
        out[live] = np.exp(self.log_root + np.log(norms[live]) * inv_k)
        return out


def _max_row_norm(m: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(m, axis=1)))


def repeated_squaring(
    b: np.ndarray,
    squarings: int,
    *,
    normalize: bool = True,
    stagnation_tol: float = 1e-14,
) -> SquaringResult:
    """Compute B^(2^squarings) in normalized form.

    Once the normalized matrix stops changing the remaining squarings only
    multiply the scale, which is accumulated in closed form.
    """
    m = np.array(b, dtype=np.float64)
    if not normalize:
        for _ in range(squarings):
            m = m @ m
        return SquaringResult(m, 0.0, squarings, squarings)

    scale = _max_row_norm(m)
    if scale == 0.0:
        return SquaringResult(m, -math.inf, squarings, 0)
    m = m / scale
    log_root = math.log(scale)
    for s in range(1, squarings + 1):
        nxt = m @ m
        scale = _max_row_norm(nxt)
        if scale == 0.0:
            return SquaringResult(nxt, -math.inf, squarings, s)
        nxt /= scale
        log_root += math.ldexp(math.log(scale), -s)
        if float(np.max(np.abs(nxt - m))) < stagnation_tol:
            tail = math.ldexp(1.0, -s) - math.ldexp(1.0, -squarings)
            return SquaringResult(nxt, log_root + math.log(scale) * tail, squarings, s)
        m = nxt
    return SquaringResult(m, log_root, squarings, squarings)


def _as_matrix(a) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def direction_squarings(d: int, p_max: int, cfg: PowerIterConfig) -> int:
    """Squarings until k reaches min(e^{c(d + log p)}, 2^max_squarings)."""
    needed = math.ceil(cfg.c * (d + math.log(p_max)) / math.log(2.0))
    return max(1, min(cfg.max_squarings, needed))


def direction_from_matrix(
    a: np.ndarray,
    hess: np.ndarray,
    x: np.ndarray,
    squarings: int,
    cfg: PowerIterConfig | None = None,
) -> np.ndarray:
    """Column of A^k with the smallest Rayleigh quotient against `hess`."""
    cfg = cfg or PowerIterConfig()
    res = repeated_squaring(
        a, squarings,
        normalize=cfg.normalize_each_squaring,
        stagnation_tol=cfg.stagnation_tol,
    )
    norms = np.linalg.norm(res.matrix, axis=0)
    with np.errstate(divide="ignore"):
        live = np.isfinite(norms) & (np.log(norms) > LOG_FLOOR)
    if not live.any():
        raise DegenerateDirectionError("all columns of the squared matrix are below the floor")
    cols = res.matrix[:, live] / norms[live]
    rayleigh = np.sum(cols * (hess @ cols), axis=0)
    v = cols[:, int(np.argmin(rayleigh))].copy()
    v -= (v @ x) * x
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        raise DegenerateDirectionError("selected column is parallel to x")
    return v / nv


def find_descent_direction(
    sys: PolynomialSystem,
    x,
    cfg: PowerIterConfig | None = None,
    C1: float = 1.0,
    hess: np.ndarray | None = None,
) -> np.ndarray:
    """Unit tangent vector with strongly negative curvature of H at x."""
    cfg = cfg or PowerIterConfig()
    x = np.asarray(x, dtype=np.float64)
    if abs(float(np.linalg.norm(x)) - 1.0) > 1e-8:
        raise ValueError("find_descent_direction needs a unit vector")
    d, p = sys.d, sys.p_max
    if hess is None:
        hess = energy_hessian(sys, x)
    proj = np.eye(d) - np.outer(x, x)
    mu = 9.0 * C1 * d * p**2 * math.log(p)
    # keep mu*I - Hess positive semidefinite on the tangent space
    mu = max(mu, float(np.max(np.sum(np.abs(proj @ hess @ proj), axis=1))))
    a = proj @ (mu * np.eye(d) - hess) @ proj
    a = 0.5 * (a + a.T)
    return direction_from_matrix(a, hess, x, direction_squarings(d, p, cfg), cfg)


def s_max_sq(a) -> float:
    """Estimate of lambda_max(A A^T), i.e. the squared top singular value."""
    a = _as_matrix(a)
    if not a.any():
        return 0.0
    m = a.shape[0]
    b = a @ a.T
    squarings = max(0, math.ceil(math.log2(math.log2(max(m, 2)))))
    return float(np.max(repeated_squaring(b, squarings).column_roots()))


def sigma_max_est(a) -> float:
    return math.sqrt(s_max_sq(a))


def s_min(a, kappa: float = 1.0, *, log2_kappa: float | None = None) -> float:
    """Upper-biased estimate of the smallest singular value of A (M <= L).

    Pass `log2_kappa` instead of `kappa` when kappa overflows a double.
    """
    a = _as_matrix(a)
    m, l = a.shape
    if m > l:
        raise ValueError(f"s_min needs M <= L, got {m}x{l}")
    if log2_kappa is None:
        if not kappa >= 1.0:
            raise ValueError(f"kappa must be >= 1, got {kappa}")
        log2_kappa = math.log2(kappa)
    elif log2_kappa < 0:
        raise ValueError(f"kappa must be >= 1, got 2**{log2_kappa}")
    if not a.any():
        return 0.0
    s_hat = s_max_sq(a)
    b = a @ a.T
    dmat = 2.0 * s_hat * np.eye(m) - b
    res = repeated_squaring(dmat, max(0, math.ceil(log2_kappa)))
    top = float(np.max(res.column_roots()))
    return math.sqrt(max(2.0 * s_hat - top, 0.0))
