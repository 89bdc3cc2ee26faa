"""Command-line entry point: gen, solve, certify, probe, bench and stats."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from sphere_roots.charts import plot_energy_trace
from sphere_roots.config import (
    build_solver_config,
    create_parser,
    load_config,
    parse_float_list,
    parse_int_list,
    resolve,
)
from sphere_roots.driver import dispatch
from sphere_roots.newton import certify
from sphere_roots.params import CERT_MODES, SOLVE_MODES
from sphere_roots.polysys import GenerationRecord, energy_hessian, system_to_dict, tangent_basis
from sphere_roots.report import (
    emit,
    format_run_report,
    format_table,
    load_system,
    read_json,
)
from sphere_roots.spectral import find_descent_direction, s_max_sq, s_min
from sphere_roots.stats_cli import add_bench_parser, add_stats_parsers
from sphere_roots.verify import dense_svd, dense_symmetric_eigen


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, default=None, help="write the JSON document here")
    parser.add_argument("--json", action="store_true", help="print JSON instead of a table")
    parser.add_argument("--quiet", action="store_true", help="suppress progress on stderr")


def _unit_point(raw: str, d: int, tol: float) -> np.ndarray:
    x = np.array(parse_float_list(raw))
    if x.shape != (d,):
        raise ValueError(f"point has {x.size} coordinates, system has d={d}")
    norm = float(np.linalg.norm(x))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"point is not on the unit sphere (|x| = {norm:.15g})")
    return x / norm


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args: argparse.Namespace, r: dict) -> int:
    record = GenerationRecord(args.d, tuple(parse_int_list(args.degrees)), int(r["seed"]))
    system = record.regenerate()
    doc = record.to_dict() if args.record_only else system_to_dict(system)
    text = f"d={system.d} n={system.n} degrees={list(system.degrees)} seed={record.seed} coefficients={system.N:,}"
    emit(doc, text, args.out, args.json)
    return 0


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def cmd_solve(args: argparse.Namespace, r: dict) -> int:
    cfg = build_solver_config(r, mode=args.mode, quiet=args.quiet)
    if args.input is not None:
        if args.d is not None or args.degrees is not None:
            raise ValueError("--in cannot be combined with --d/--degrees")
        system, descriptor = load_system(args.input)
        report = dispatch(system=system, cfg=cfg, input_descriptor=descriptor)
    else:
        if args.d is None or args.degrees is None:
            raise ValueError("solve needs --in FILE or both --d and --degrees")
        report = dispatch(d=args.d, degrees=parse_int_list(args.degrees), cfg=cfg)
    doc = report.to_dict()
    if args.chart_dir is not None and report.algorithm == "hd":
        path = plot_energy_trace(
            report.stats["energy_trace"], args.chart_dir, name=f"seed{cfg.seed}",
            pre_projection_trace=report.stats["pre_projection_trace"],
            energy_floor=report.stats["energy_floor"],
        )
        print(f"wrote {path}", file=sys.stderr)
    emit(doc, format_run_report(doc), args.out, args.json)
    return 0


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------

def cmd_certify(args: argparse.Namespace, r: dict) -> int:
    cfg = build_solver_config(r)
    system, descriptor = load_system(args.input)
    x = _unit_point(args.point, system.d, cfg.unit_tol)
    cert = certify(system, x, cfg.cert_config(), mode=args.mode)
    doc = {"kind": "certification", "input": descriptor, "point": x.tolist()} | cert.to_dict()
    status = "certified" if cert.certified else "not certified"
    rows = [[i, h] for i, h in enumerate(cert.residual_trace)]
    text = format_table(["step", "H"], rows, f"{cert.label}: {status} ({cert.reason})")
    emit(doc, text, args.out, args.json)
    return 0


# ---------------------------------------------------------------------------
# probe
# ---------------------------------------------------------------------------

def _load_matrix(args: argparse.Namespace, seed: int) -> np.ndarray:
    if args.matrix is not None:
        if args.matrix.suffix == ".npy":
            return np.load(args.matrix)
        doc = read_json(args.matrix)
        return np.asarray(doc["matrix"], dtype=np.float64)
    if args.shape is None:
        raise ValueError("probe needs --matrix FILE or --shape M,L")
    shape = parse_int_list(args.shape)
    if len(shape) != 2:
        raise ValueError(f"--shape takes two integers, got {args.shape!r}")
    return np.random.default_rng(seed).standard_normal(tuple(shape))


def cmd_probe(args: argparse.Namespace, r: dict) -> int:
    seed = int(r["seed"])
    if args.what == "direction":
        system, descriptor = load_system(args.input)
        cfg = build_solver_config(r)
        x = _unit_point(args.point, system.d, cfg.unit_tol)
        v = find_descent_direction(system, x, cfg.power_config(), cfg.C1)
        u = tangent_basis(x)
        hess = energy_hessian(system, x)
        lam = float(dense_symmetric_eigen(u.T @ hess @ u)[0][0])
        rq = float(v @ hess @ v)
        doc = {"kind": "probe", "probe": "direction", "input": descriptor, "point": x.tolist(),
               "direction": v.tolist(), "rayleigh": rq, "lambda_min": lam}
        text = format_table(["rayleigh", "lambda_min", "ratio"], [[rq, lam, rq / lam if lam else None]], "descent direction")
        emit(doc, text, args.out, args.json)
        return 0

    a = _load_matrix(args, seed)
    sv = dense_svd(a)[1]
    if args.what == "smax":
        est = s_max_sq(a)
        exact = float(sv[0] ** 2)
        doc = {"kind": "probe", "probe": "smax", "shape": list(a.shape), "estimate": est, "dense": exact}
        text = format_table(["M", "L", "s_max_sq", "lambda_max"], [[a.shape[0], a.shape[1], est, exact]], "top eigenvalue of A A^T")
    else:
        est = s_min(a, args.kappa)
        exact = float(sv[min(a.shape) - 1])
        doc = {"kind": "probe", "probe": "smin", "shape": list(a.shape), "kappa": args.kappa,
               "estimate": est, "dense": exact}
        text = format_table(["M", "L", "kappa", "s_min", "sigma_min"], [[a.shape[0], a.shape[1], args.kappa, est, exact]], "smallest singular value")
    emit(doc, text, args.out, args.json)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = create_parser()
    parser = argparse.ArgumentParser(
        prog="sphere-roots",
        description="Find roots of random homogeneous Gaussian polynomial systems on the unit sphere",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="sample a Kostlan system")
    p.add_argument("--d", type=int, required=True, help="number of variables")
    p.add_argument("--degrees", type=str, required=True, help="comma-separated degrees, e.g. 2,3")
    p.add_argument("--record-only", action="store_true", help="write the seed record instead of coefficients")
    _add_output_args(p)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("solve", parents=[common], help="find an approximate root")
    p.add_argument("mode", choices=SOLVE_MODES, help="auto picks the algorithm from the regime")
    p.add_argument("--in", dest="input", type=Path, default=None, help="system or generation record JSON")
    p.add_argument("--d", type=int, default=None, help="number of variables (generate mode)")
    p.add_argument("--degrees", type=str, default=None, help="degrees, cycled to the required n (generate mode)")
    p.add_argument("--chart-dir", type=Path, default=None, help="write the energy trace PNG here")
    _add_output_args(p)
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("certify", parents=[common], help="check a candidate point")
    p.add_argument("--in", dest="input", type=Path, required=True, help="system or generation record JSON")
    p.add_argument("--point", type=str, required=True, help="comma-separated unit vector")
    p.add_argument("--mode", choices=CERT_MODES, default=None, help="certification mode")
    p.add_argument("--unit-tol", type=float, default=None, help="accepted deviation of |x| from 1")
    _add_output_args(p)
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("probe", parents=[common], help="run a spectral sub-routine against the dense oracle")
    p.add_argument("what", choices=("smin", "smax", "direction"))
    p.add_argument("--matrix", type=Path, default=None, help=".npy or JSON {\"matrix\": [[...]]}")
    p.add_argument("--shape", type=str, default=None, help="random Gaussian M,L matrix from --seed")
    p.add_argument("--kappa", type=float, default=1e6, help="conditioning parameter for smin (default: 1e6)")
    p.add_argument("--in", dest="input", type=Path, default=None, help="system for the direction probe")
    p.add_argument("--point", type=str, default=None, help="unit vector for the direction probe")
    _add_output_args(p)
    p.set_defaults(handler=cmd_probe)

    add_bench_parser(sub, common, _add_output_args)
    add_stats_parsers(sub, common, _add_output_args)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "probe" and args.what == "direction" and (args.input is None or args.point is None):
        parser.error("probe direction needs --in and --point")
    config = load_config(args.config)
    try:
        r = resolve(args, config)
        return args.handler(args, r)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
