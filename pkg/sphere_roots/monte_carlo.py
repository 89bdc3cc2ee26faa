"""Seeded ensemble runs behind the stats and bench commands."""

from __future__ import annotations

import math
import sys as _sys
import time
from collections import Counter
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from functools import partial
from typing import TypeVar

import numpy as np
from scipy import stats

from sphere_roots.driver import RunReport, dispatch
from sphere_roots.hessdesc import hd_equation_count, hd_run
from sphere_roots.params import SolverConfig
from sphere_roots.polysys import (
    evaluate,
    jacobian,
    sample_field_values,
    sample_system,
    tangent_basis,
)
from sphere_roots.verify import (
    MIN_MC_SAMPLES,
    circle_roots,
    kac_rice_expected_roots,
    sphere_scan_roots,
)

S = TypeVar("S")
T = TypeVar("T")

CONFIDENCE = 0.95


def spawn_seeds(master: int, count: int) -> list[int]:
    """Independent per-run seeds derived from one master seed."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    children = np.random.SeedSequence(master).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def run_seeded_batch(
    fn: Callable[[S], T],
    seeds: Sequence[S],
    workers: int = 1,
    quiet: bool = True,
    label: str = "runs",
    processes: bool = False,
) -> list[T]:
    """fn(seed) for every seed; results are ordered by seed index, not completion.

    With `processes` the calls run in worker processes, so `fn` must be picklable
    (a module-level function or a `functools.partial` of one).
    """
    total = len(seeds)
    results: list[T | None] = [None] * total
    step = max(1, total // 20)

    def _progress(done: int) -> None:
        if not quiet and (done % step == 0 or done == total):
            print(f"\r  {label}: {done}/{total}", end="", file=_sys.stderr)

    if workers <= 1:
        for i, s in enumerate(seeds):
            results[i] = fn(s)
            _progress(i + 1)
    else:
        pool_cls = ProcessPoolExecutor if processes else ThreadPoolExecutor
        with pool_cls(max_workers=workers) as pool:
            futures = {pool.submit(fn, s): i for i, s in enumerate(seeds)}
            for done, fut in enumerate(as_completed(futures), 1):
                results[futures[fut]] = fut.result()
                _progress(done)
    if not quiet and total:
        print(file=_sys.stderr)
    return results


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    if values.size < 2:
        return float(values.mean()) if values.size else 0.0, math.inf
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


@dataclass
class RootCountResult:
    d: int
    degree: int
    trials: int
    counts: list[int] = field(default_factory=list)
    mean: float = 0.0
    se: float = 0.0
    target: float = 0.0
    bezout: float = 0.0
    min_gap: float | None = None
    coarse_runs: int = 0

    @property
    def relative_error(self) -> float:
        return abs(self.mean - self.target) / self.target

    @property
    def interval(self) -> tuple[float, float]:
        z = float(stats.norm.ppf(0.5 + CONFIDENCE / 2))
        return self.mean - z * self.se, self.mean + z * self.se

    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(self.counts).items()))

    def to_dict(self) -> dict:
        lo, hi = self.interval
        return {
            "kind": "rootcount",
            "d": self.d,
            "degree": self.degree,
            "trials": self.trials,
            "mean": self.mean,
            "se": self.se,
            "interval": [lo, hi],
            "target": self.target,
            "bezout": self.bezout,
            "relative_error": self.relative_error,
            "histogram": {str(k): v for k, v in self.histogram().items()},
            "min_gap": self.min_gap,
            "coarse_runs": self.coarse_runs,
        }


def rootcount(
    d: int,
    degree: int,
    trials: int,
    seed: int = 0,
    grid_size: int = 20_000,
    resolution: float = 0.02,
    workers: int = 1,
    quiet: bool = True,
) -> RootCountResult:
    """Mean number of sphere roots of n = d - 1 Kostlan equations.

    d = 2 uses the angle scan with `grid_size` points; d = 3 uses the
    latitude-longitude scan at `resolution`.
    """
    if d not in (2, 3):
        raise ValueError(f"root counting is only supported for d in (2, 3), got {d}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    degrees = [degree] * (d - 1)

    def _one(s: int):
        sys = sample_system(d, degrees, s)
        if d == 2:
            return circle_roots(sys, grid_size=grid_size)
        return sphere_scan_roots(sys, resolution=resolution)

    oracle_sets = run_seeded_batch(_one, spawn_seeds(seed, trials), workers, quiet, "rootcount")
    target = kac_rice_expected_roots(degrees)
    result = RootCountResult(d, degree, trials, target=target.direct, bezout=target.bezout)
    result.counts = [len(o) for o in oracle_sets]
    result.mean, result.se = _mean_se(np.array(result.counts, dtype=np.float64))
    gaps = [o.min_gap for o in oracle_sets if o.min_gap is not None]
    result.min_gap = min(gaps) if gaps else None
    result.coarse_runs = sum(o.coarse for o in oracle_sets)
    return result


@dataclass
class JacobianRow:
    degree: int
    mean: float
    variance: float
    variance_se: float
    value_cross: float
    value_cross_se: float

    @property
    def z(self) -> float:
        return (self.variance - self.degree) / self.variance_se

    def to_dict(self) -> dict:
        return dict(self.__dict__) | {"z": self.z}


@dataclass
class JacobianLawReport:
    d: int
    samples: int
    rows: list[JacobianRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": "jacobian", "d": self.d, "samples": self.samples, "rows": [r.to_dict() for r in self.rows]}


def jacobian_law(
    d: int,
    degrees: Sequence[int],
    x,
    samples: int,
    seed: int = 0,
) -> JacobianLawReport:
    """Moments of DF(x) U_x over fresh systems at a fixed point.

    Row i should be centred Gaussian with variance p_i, independent of F_i(x).
    """
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    x = np.asarray(x, dtype=np.float64)
    x = x / np.linalg.norm(x)
    u = tangent_basis(x)
    rng = np.random.default_rng(seed)
    n = len(degrees)
    tangent = np.empty((samples, n, d - 1))
    values = np.empty((samples, n))
    for s in range(samples):
        sys = sample_system(d, degrees, rng)
        tangent[s] = jacobian(sys, x) @ u
        values[s] = evaluate(sys, x)
    report = JacobianLawReport(d, samples)
    for i, p in enumerate(degrees):
        entries = tangent[:, i, :].ravel()
        var = float(entries.var(ddof=1))
        cross_mean, cross_se = _mean_se((values[:, i, np.newaxis] * tangent[:, i, :]).ravel())
        report.rows.append(JacobianRow(
            degree=int(p),
            mean=float(entries.mean()),
            variance=var,
            variance_se=var * math.sqrt(2.0 / (entries.size - 1)),
            value_cross=cross_mean,
            value_cross_se=cross_se,
        ))
    return report


@dataclass
class RotationReport:
    d: int
    degree: int
    samples: int
    statistic: float
    pvalue: float
    variance_base: float
    variance_rotated: float

    def to_dict(self) -> dict:
        return {"kind": "rotation"} | dict(self.__dict__)


def rotation_invariance(
    d: int,
    degree: int,
    x0,
    rotation=None,
    samples: int = 10_000,
    seed: int = 0,
) -> RotationReport:
    """Two-sample KS test of F(x0) against F(O x0) over independent draws."""
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"need at least {MIN_MC_SAMPLES} samples, got {samples}")
    rng = np.random.default_rng(seed)
    x0 = np.asarray(x0, dtype=np.float64)
    x0 = x0 / np.linalg.norm(x0)
    if rotation is None:
        rotation = stats.special_ortho_group.rvs(d, random_state=rng)
    rotation = np.asarray(rotation, dtype=np.float64)
    if not np.allclose(rotation @ rotation.T, np.eye(d), atol=1e-10):
        raise ValueError("rotation must be orthogonal")
    base = sample_field_values(d, degree, x0[np.newaxis, :], samples, rng)[:, 0]
    rotated = sample_field_values(d, degree, (rotation @ x0)[np.newaxis, :], samples, rng)[:, 0]
    ks = stats.ks_2samp(base, rotated)
    return RotationReport(
        d, degree, samples, float(ks.statistic), float(ks.pvalue),
        float(base.var(ddof=1)), float(rotated.var(ddof=1)),
    )


@dataclass
class BenchRow:
    d: int
    n: int
    seed: int
    seconds: float
    iterations: int
    final_energy: float
    solved: bool
    certified: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def bench_hd(
    dims: Sequence[int],
    degree: int,
    seeds: Sequence[int],
    cfg: SolverConfig | None = None,
    workers: int = 1,
    quiet: bool = True,
    processes: bool = False,
) -> list[BenchRow]:
    """Wall time and iteration counts of Hessian Descent across dimensions."""
    cfg = cfg or SolverConfig()
    jobs = [(d, s) for d in dims for s in seeds]
    return run_seeded_batch(
        partial(_bench_job, degree=degree, cfg=cfg), jobs, workers, quiet, "bench", processes,
    )


def solve_ensemble(
    d: int,
    degrees: Sequence[int],
    seeds: Sequence[int],
    cfg: SolverConfig | None = None,
    workers: int = 1,
    quiet: bool = True,
    processes: bool = False,
) -> list[RunReport]:
    """Generate-mode `dispatch` once per seed, reports in seed order."""
    cfg = cfg or SolverConfig()
    return run_seeded_batch(
        partial(_solve_seed, d=d, degrees=tuple(degrees), cfg=cfg), seeds, workers, quiet, "solve", processes,
    )


def _bench_job(job: tuple[int, int], degree: int, cfg: SolverConfig) -> BenchRow:
    d, s = job
    n = hd_equation_count(d, cfg.A)
    sys = sample_system(d, [degree] * n, s)
    started = time.perf_counter()
    res = hd_run(sys, cfg.hd_config())
    elapsed = time.perf_counter() - started
    cert = res.certification
    return BenchRow(
        d=d, n=n, seed=s, seconds=elapsed, iterations=res.iterations,
        final_energy=res.energy_trace[-1],
        solved=res.outcome is not None,
        certified=cert is not None and cert.certified,
    )


def _solve_seed(seed: int, d: int, degrees: tuple[int, ...], cfg: SolverConfig) -> RunReport:
    return dispatch(d=d, degrees=degrees, cfg=replace(cfg, seed=seed))


def summarize_bench(rows: Sequence[BenchRow]) -> list[dict]:
    """Per-dimension medians, one entry per d in first-seen order."""
    by_d: dict[int, list[BenchRow]] = {}
    for r in rows:
        by_d.setdefault(r.d, []).append(r)
    out = []
    for d, group in by_d.items():
        out.append({
            "d": d,
            "n": group[0].n,
            "runs": len(group),
            "solved": sum(r.solved for r in group) / len(group),
            "median_seconds": float(np.median([r.seconds for r in group])),
            "median_iterations": float(np.median([r.iterations for r in group])),
        })
    return out
