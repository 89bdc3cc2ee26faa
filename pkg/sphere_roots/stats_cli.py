"""bench and stats subcommands: seeded ensembles with JSON and table output."""

from __future__ import annotations

import argparse
import math
import sys
from collections.abc import Callable
from pathlib import Path

import numpy as np

from sphere_roots.charts import plot_bench_scaling, plot_rootcount_histogram
from sphere_roots.config import build_solver_config, parse_float_list, parse_int_list
from sphere_roots.monte_carlo import (
    bench_hd,
    jacobian_law,
    rootcount,
    rotation_invariance,
    spawn_seeds,
    summarize_bench,
)
from sphere_roots.mss import mss_params
from sphere_roots.report import (
    emit,
    format_bench,
    format_covariance,
    format_jacobian,
    format_lipschitz,
    format_rootcount,
    format_rotation,
    load_system,
)
from sphere_roots.verify import mc_covariance, mc_lipschitz

OutputArgs = Callable[[argparse.ArgumentParser], None]


def _overlap_pairs(d: int, overlaps: list[float]) -> list[tuple[np.ndarray, np.ndarray]]:
    """(e_1, t e_1 + sqrt(1 - t^2) e_2) for every overlap t."""
    if d < 2:
        raise ValueError(f"covariance pairs need d >= 2, got {d}")
    e = np.eye(d)
    pairs = []
    for t in overlaps:
        if not -1.0 <= t <= 1.0:
            raise ValueError(f"overlap must lie in [-1, 1], got {t}")
        pairs.append((e[0], t * e[0] + math.sqrt(1.0 - t * t) * e[1]))
    return pairs


def cmd_bench(args: argparse.Namespace, r: dict) -> int:
    cfg = build_solver_config(r, mode="hd", quiet=True)
    dims = parse_int_list(args.dims)
    seeds = spawn_seeds(cfg.seed, args.runs)
    rows = bench_hd(
        dims, args.degree, seeds, cfg, workers=cfg.threads, quiet=args.quiet, processes=args.processes,
    )
    summary = summarize_bench(rows)
    doc = {
        "kind": "bench",
        "degree": args.degree,
        "seed": cfg.seed,
        "runs": [row.to_dict() for row in rows],
        "summary": summary,
    }
    if args.chart_dir is not None:
        print(f"wrote {plot_bench_scaling(rows, args.chart_dir)}", file=sys.stderr)
    emit(doc, format_bench(summary), args.out, args.json)
    return 0


def cmd_rootcount(args: argparse.Namespace, r: dict) -> int:
    result = rootcount(
        args.d, args.p, args.trials, seed=int(r["seed"]), grid_size=args.grid_size,
        resolution=args.resolution, workers=int(r["threads"]), quiet=args.quiet,
    )
    doc = result.to_dict()
    if args.chart_dir is not None:
        print(f"wrote {plot_rootcount_histogram(result, args.chart_dir, name=f'p{args.p}')}", file=sys.stderr)
    emit(doc, format_rootcount(doc), args.out, args.json)
    return 0


def cmd_covariance(args: argparse.Namespace, r: dict) -> int:
    pairs = _overlap_pairs(args.d, parse_float_list(args.overlaps))
    report = mc_covariance(args.d, args.p, pairs, args.samples, seed=int(r["seed"]))
    doc = {"kind": "covariance"} | report.to_dict()
    emit(doc, format_covariance(doc), args.out, args.json)
    return 0


def cmd_lipschitz(args: argparse.Namespace, r: dict) -> int:
    system, descriptor = load_system(args.input)
    est = mc_lipschitz(system, args.samples, seed=int(r["seed"]))
    doc = {"kind": "lipschitz", "input": descriptor} | est.to_dict()
    if system.n == system.d - 1:
        cfg = build_solver_config(r)
        doc["L"] = mss_params(system.d, system.p_max, cfg.u1, cfg.u2, cfg.u3, cfg.mss_delta, cfg.C0).L
    emit(doc, format_lipschitz(doc), args.out, args.json)
    return 0


def cmd_jacobian(args: argparse.Namespace, r: dict) -> int:
    x = np.eye(args.d)[0] if args.point is None else np.array(parse_float_list(args.point))
    report = jacobian_law(args.d, parse_int_list(args.degrees), x, args.samples, seed=int(r["seed"]))
    doc = report.to_dict()
    emit(doc, format_jacobian(doc), args.out, args.json)
    return 0


def cmd_rotation(args: argparse.Namespace, r: dict) -> int:
    x = np.eye(args.d)[0] if args.point is None else np.array(parse_float_list(args.point))
    report = rotation_invariance(args.d, args.p, x, samples=args.samples, seed=int(r["seed"]))
    doc = report.to_dict()
    emit(doc, format_rotation(doc), args.out, args.json)
    return 0


def add_bench_parser(sub, common: argparse.ArgumentParser, output_args: OutputArgs) -> None:
    p = sub.add_parser("bench", parents=[common], help="time Hessian Descent across dimensions")
    p.add_argument("--dims", type=str, default="10,20,40", help="comma-separated d values (default: 10,20,40)")
    p.add_argument("--degree", type=int, default=3, help="degree of every equation (default: 3)")
    p.add_argument("--runs", type=int, default=3, help="seeds per dimension (default: 3)")
    p.add_argument("--processes", action="store_true", help="run the --threads workers as processes")
    p.add_argument("--chart-dir", type=Path, default=None, help="write the scaling PNG here")
    output_args(p)
    p.set_defaults(handler=cmd_bench)


def add_stats_parsers(sub, common: argparse.ArgumentParser, output_args: OutputArgs) -> None:
    stats = sub.add_parser("stats", help="Monte Carlo checks of the random ensemble")
    kinds = stats.add_subparsers(dest="stat", required=True)

    p = kinds.add_parser("rootcount", parents=[common], help="mean number of sphere roots")
    p.add_argument("--d", type=int, default=2, help="2 (angle scan) or 3 (sphere scan)")
    p.add_argument("--p", type=int, required=True, help="degree of every equation")
    p.add_argument("--trials", type=int, default=2000, help="systems to sample (default: 2000)")
    p.add_argument("--grid-size", type=int, default=20_000, help="angle-scan grid for d=2 (default: 20000)")
    p.add_argument("--resolution", type=float, default=0.02, help="sphere-scan spacing for d=3 (default: 0.02)")
    p.add_argument("--chart-dir", type=Path, default=None, help="write the histogram PNG here")
    output_args(p)
    p.set_defaults(handler=cmd_rootcount)

    p = kinds.add_parser("covariance", parents=[common], help="E[F(x)F(y)] against <x,y>^p")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000, help="draws per pair (default: 100000)")
    p.add_argument("--overlaps", type=str, default="-1,0,0.5,1", help="overlaps <x,y> (default: -1,0,0.5,1)")
    output_args(p)
    p.set_defaults(handler=cmd_covariance)

    p = kinds.add_parser("lipschitz", parents=[common], help="sampled sup and Lipschitz bounds of a system")
    p.add_argument("--in", dest="input", type=Path, required=True, help="system or generation record JSON")
    p.add_argument("--samples", type=int, default=1000, help="point pairs (default: 1000)")
    output_args(p)
    p.set_defaults(handler=cmd_lipschitz)

    p = kinds.add_parser("jacobian", parents=[common], help="law of the tangent Jacobian at a fixed point")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--degrees", type=str, required=True)
    p.add_argument("--point", type=str, default=None, help="fixed point (default: e_1)")
    p.add_argument("--samples", type=int, default=2000, help="systems to sample (default: 2000)")
    output_args(p)
    p.set_defaults(handler=cmd_jacobian)

    p = kinds.add_parser("rotation", parents=[common], help="KS test of F(x) against F(Ox)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--point", type=str, default=None, help="base point (default: e_1)")
    p.add_argument("--samples", type=int, default=10_000, help="draws per side (default: 10000)")
    output_args(p)
    p.set_defaults(handler=cmd_rotation)
