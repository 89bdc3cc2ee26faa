"""Regime selection and dispatch to Hessian Descent or Multi-Scale Search."""

from __future__ import annotations

import dataclasses
import math
import sys as _sys
import time
from collections.abc import Sequence
from dataclasses import dataclass, field

from sphere_roots.hessdesc import hd_budget, hd_run, hd_equation_count
from sphere_roots.mss import log_block_budget, mss_failure_bound, mss_params, mss_run
from sphere_roots.params import SCHEMA_VERSION, SolverConfig
from sphere_roots.polysys import GenerationRecord, PolynomialSystem

REGIMES = ("Λ1", "Λ2", "Λ3", "Λ4")


def regime(d: int, p_max: int, delta: float, C: float = 1.0) -> str:
    """Classify (d, p_max, delta) into the four dispatch sets."""
    if d < 1 or p_max < 2 or not 0 < delta < 1 or C <= 0:
        raise ValueError(f"invalid regime query d={d}, p_max={p_max}, delta={delta}, C={C}")
    log_delta = math.log(delta)
    if p_max < d * d:
        return "Λ1" if math.log(C) - d / C < log_delta else "Λ2"
    return "Λ3" if -d * math.log(p_max) < log_delta else "Λ4"


def regime_u(reg: str, d: int, p_max: int, cfg: SolverConfig) -> tuple[float, float, float]:
    """(u1, u2, u3) for an MSS regime."""
    if reg != "Λ3":
        return cfg.u1, cfg.u2, cfg.u3
    C = cfg.C
    log_p = math.log(p_max)
    u1 = 1.0 + math.sqrt(C * (math.log(6.0) / d + log_p))
    u2 = math.exp(-d * log_p) / (3.0 * C)
    if u2 == 0.0 or d * log_p > 700:
        raise ValueError("parameters out of floating range")
    u3 = C * math.exp(d * log_p) * (d * log_p + cfg.C_dprime) / 3.0
    return u1, u2, u3


@dataclass
class RunReport:
    input: dict
    regime: str
    n: int
    algorithm: str
    outcome: list[float] | None
    reason: str
    certification: dict | None
    stats: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    failure_bound: float | None = None
    warnings: list[str] = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {"schema_version": SCHEMA_VERSION, "kind": "run"}
        doc.update(dataclasses.asdict(self))
        return doc


def _degrees_for(degrees: Sequence[int], n: int) -> tuple[int, ...]:
    return tuple(int(degrees[i % len(degrees)]) for i in range(n))


def dispatch(
    d: int | None = None,
    degrees: Sequence[int] | None = None,
    system: PolynomialSystem | None = None,
    cfg: SolverConfig | None = None,
    input_descriptor: dict | None = None,
) -> RunReport:
    """Solve a given system, or generate one sized for the selected regime and solve it."""
    cfg = cfg or SolverConfig()
    timings: dict[str, float] = {}
    warnings: list[str] = []
    if system is not None:
        d, p_max = system.d, system.p_max
    else:
        if d is None or not degrees:
            raise ValueError("dispatch needs either a system or both d and degrees")
        p_max = max(int(p) for p in degrees)
    reg = regime(d, p_max, cfg.delta, cfg.C)
    if cfg.mode == "auto":
        algorithm = "hd" if reg == "Λ1" else "mss"
    else:
        algorithm = cfg.mode

    if system is not None:
        n = system.n
        if cfg.mode == "auto" and algorithm == "mss" and n <= d - 2:
            warnings.append(f"n={n} <= d-2: using Hessian Descent regardless of regime {reg}")
            algorithm = "hd"
        descriptor = input_descriptor or {"kind": "system", "d": d, "degrees": list(system.degrees)}
    else:
        if algorithm == "hd":
            n, seed = hd_equation_count(d, cfg.A), cfg.hd_config().seed
        else:
            n, seed = d - 1, cfg.seed
        started = time.perf_counter()
        record = GenerationRecord(d, _degrees_for(degrees, n), seed)
        system = record.regenerate()
        timings["generate"] = time.perf_counter() - started
        descriptor = input_descriptor or record.to_dict()
    if algorithm == "hd" and n > d - 1:
        raise ValueError(f"Hessian Descent needs n <= d - 1, got n={n}, d={d}")
    if algorithm == "mss" and n != d - 1:
        raise ValueError(f"Multi-Scale Search needs n = d - 1, got n={n}, d={d}")
    for w in warnings:
        print(f"warning: {w}", file=_sys.stderr)

    started = time.perf_counter()
    if algorithm == "hd":
        hd_cfg = cfg.hd_config()
        res = hd_run(system, hd_cfg, quiet=cfg.quiet)
        stats = res.to_dict()
        parameters = {
            "C1": hd_cfg.C1, "c0": hd_cfg.c0, "C0_prime": hd_cfg.C0_prime, "A": cfg.A,
            "budget": res.budget, "reference_budget": hd_budget(d, p_max, hd_cfg.C0_prime),
            "energy_floor": res.energy_floor, "seed": hd_cfg.seed,
        }
        failure = None
    else:
        u1, u2, u3 = regime_u(reg, d, p_max, cfg)
        params = mss_params(d, p_max, u1, u2, u3, cfg.mss_delta, cfg.C0)
        if cfg.k0_override is not None:
            params = dataclasses.replace(params, k0=cfg.k0_override)
        res = mss_run(system, params, cfg.mss_run_config(), quiet=cfg.quiet)
        stats = res.to_dict()
        parameters = params.to_dict() | {
            "mss_delta": cfg.mss_delta, "C0": cfg.C0,
            "log_block_budget": log_block_budget(params, d, cfg.C0),
        }
        failure = mss_failure_bound(params, d, p_max, cfg.C)
    timings["solve"] = time.perf_counter() - started

    certification = stats.pop("certification")
    outcome = stats.pop("outcome")
    reason = stats.pop("reason")
    parameters |= {"delta": cfg.delta, "C": cfg.C, "mode": cfg.mode}
    return RunReport(
        input=descriptor,
        regime=reg,
        n=n,
        algorithm=algorithm,
        outcome=outcome,
        reason=reason,
        certification=certification,
        stats=stats,
        parameters=parameters,
        failure_bound=failure,
        warnings=warnings,
        timings=timings,
    )
