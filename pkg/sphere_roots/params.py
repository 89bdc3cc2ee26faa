"""Solver parameters and shared numeric constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1
RNG_ALGORITHM = "numpy.PCG64"

MACHINE_EPS = float(np.finfo(np.float64).eps)
# Every comparison threshold is floored here so it never degenerates to 0.
THRESHOLD_FLOOR = 1e3 * MACHINE_EPS
LOG_FLOOR = math.log(1e-300)

CERT_MODES = ("empirical", "analytic")
SOLVE_MODES = ("auto", "hd", "mss")


@dataclass
class PowerIterConfig:
    """Repeated-squaring settings for the descent-direction finder."""

    c: float = 2.0
    max_squarings: int = 64
    normalize_each_squaring: bool = True
    stagnation_tol: float = 1e-14

    def __post_init__(self):
        if self.max_squarings < 1:
            raise ValueError(f"max_squarings must be >= 1, got {self.max_squarings}")
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")


@dataclass
class CertConfig:
    """Approximate-solution certification settings."""

    mode: str = "empirical"
    steps: int = 8
    rank_tol: float = 1e-10
    sigma_floor: float = THRESHOLD_FLOOR
    residual_floor: float = 1e-13
    root_tol: float = 1e-10
    slack: float = 2.0
    # analytic mode surrogates
    lipschitz: float | None = None
    C0: float = 1.0

    def __post_init__(self):
        if self.mode not in CERT_MODES:
            raise ValueError(f"unknown certification mode: {self.mode!r}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")


@dataclass
class HDConfig:
    """Hessian Descent constants; defaults are calibration targets."""

    C1: float = 1.0
    c0: float = 6.0
    C0_prime: float = 4.0
    max_iters: int | None = None
    energy_floor: float | None = None
    seed: int = 0
    power: PowerIterConfig = field(default_factory=PowerIterConfig)
    cert: CertConfig = field(default_factory=CertConfig)

    def __post_init__(self):
        for name in ("C1", "c0", "C0_prime"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_iters is not None and self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters}")

    def resolved_energy_floor(self, d: int, p_max: int) -> float:
        if self.energy_floor is not None:
            return self.energy_floor
        log_floor = -self.c0 * d * math.log(p_max)
        return max(math.exp(max(log_floor, -745.0)), 1e-24)


@dataclass
class MSSRunConfig:
    """Execution settings for a Multi-Scale Search run."""

    workers: int = 1
    max_blocks: int | None = None
    record_visits: bool = False
    cert: CertConfig = field(default_factory=CertConfig)


@dataclass
class SolverConfig:
    """Top-level configuration for a dispatched solve.

    The constants C, C0, C1, c0, C0_prime, C_dprime and A have no known
    absolute values; the defaults are calibration targets.
    """

    delta: float = 0.1
    delta_prime: float = 0.5
    delta0: float = 0.2
    mode: str = "auto"
    seed: int = 0
    threads: int = 1
    quiet: bool = True

    # absolute constants
    A: float = 1.0
    C: float = 1.0
    C0: float = 1.0
    C1: float = 1.0
    c0: float = 6.0
    c: float = 2.0
    C0_prime: float = 4.0
    C_dprime: float = 10.0

    # finite-regime MSS parameters
    u1: float = 2.0
    u2: float = 0.25
    u3: float = 1e3
    mss_delta: float = 0.1
    k0_override: int | None = None
    max_blocks: int | None = None

    # Hessian Descent overrides
    hd_max_iters: int | None = None
    energy_floor: float | None = None

    # tolerances
    rank_tol: float = 1e-10
    unit_tol: float = 1e-12
    cert_mode: str = "empirical"
    cert_steps: int = 8

    def __post_init__(self):
        if not 0 < self.delta0 <= 1:
            raise ValueError(f"delta0 must lie in (0, 1], got {self.delta0}")
        if not 0 < self.delta < self.delta0:
            raise ValueError(f"delta must lie in (0, {self.delta0}), got {self.delta}")
        if self.delta_prime <= 0:
            raise ValueError(f"delta_prime must be positive, got {self.delta_prime}")
        if self.mode not in SOLVE_MODES:
            raise ValueError(f"unknown mode: {self.mode!r}")
        for name in ("A", "C", "C0", "C1", "c0", "c", "C0_prime", "C_dprime"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")

    def cert_config(self) -> CertConfig:
        return CertConfig(
            mode=self.cert_mode,
            steps=self.cert_steps,
            rank_tol=self.rank_tol,
            C0=self.C0,
        )

    def power_config(self) -> PowerIterConfig:
        return PowerIterConfig(c=self.c)

    def hd_config(self) -> HDConfig:
        return HDConfig(
            C1=self.C1,
            c0=self.c0,
            C0_prime=self.C0_prime,
            max_iters=self.hd_max_iters,
            energy_floor=self.energy_floor,
            seed=self.seed,
            power=self.power_config(),
            cert=self.cert_config(),
        )

    def mss_run_config(self) -> MSSRunConfig:
        return MSSRunConfig(
            workers=self.threads,
            max_blocks=self.max_blocks,
            cert=self.cert_config(),
        )
