"""TOML config loader with CLI > config > environment > default resolution."""

from __future__ import annotations

import argparse
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections.abc import Mapping
from pathlib import Path

from sphere_roots.params import CERT_MODES, SolverConfig

DEFAULT_CONFIG_PATH = Path("sphere_roots.toml")
SEED_ENV_VAR = "SPHERE_ROOTS_SEED"

DEFAULTS = {
    "seed": 0,
    "threads": 1,
    "delta": 0.1,
    "delta_prime": 0.5,
    "delta0": 0.2,
    "A": 1.0,
    "C": 1.0,
    "C0": 1.0,
    "C1": 1.0,
    "c0": 6.0,
    "c": 2.0,
    "C0_prime": 4.0,
    "C_dprime": 10.0,
    "u1": 2.0,
    "u2": 0.25,
    "u3": 1e3,
    "mss_delta": 0.1,
    "k0": None,
    "max_blocks": None,
    "hd_max_iters": None,
    "energy_floor": None,
    "rank_tol": 1e-10,
    "unit_tol": 1e-12,
    "cert_mode": "empirical",
    "cert_steps": 8,
}

# TOML sub-tables flattened into DEFAULTS keys
_TABLES = {
    "hd": {"max_iters": "hd_max_iters", "energy_floor": "energy_floor", "C1": "C1", "c0": "c0", "C0_prime": "C0_prime"},
    "mss": {"u1": "u1", "u2": "u2", "u3": "u3", "delta": "mss_delta", "k0": "k0", "max_blocks": "max_blocks"},
    "cert": {"mode": "cert_mode", "steps": "cert_steps", "rank_tol": "rank_tol"},
}


def load_config(path: Path | None = None) -> dict:
    """Load TOML config file. Returns empty dict if file doesn't exist."""
    if path is None:
        path = DEFAULT_CONFIG_PATH
    if not path.exists():
        return {}
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        print(f"failed to read config file: {path}: {e}", file=sys.stderr)
        raise SystemExit(1)
    for table, keys in _TABLES.items():
        sub = raw.pop(table, None)
        if sub is None:
            continue
        for key, value in sub.items():
            if key not in keys:
                print(f"warning: ignoring unknown key [{table}].{key} in {path}", file=sys.stderr)
                continue
            raw.setdefault(keys[key], value)
    for key in list(raw):
        if key not in DEFAULTS:
            print(f"warning: ignoring unknown key {key!r} in {path}", file=sys.stderr)
            raw.pop(key)
    return raw


def create_parser() -> argparse.ArgumentParser:
    """Parent parser with the shared solver flags (all default to None)."""
    d = DEFAULTS
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("solver settings")
    group.add_argument("--config", type=Path, default=None, help=f"config file (default: {DEFAULT_CONFIG_PATH})")
    group.add_argument("--seed", type=int, default=None, help=f"master seed (default: ${SEED_ENV_VAR} or {d['seed']})")
    group.add_argument("--threads", type=int, default=None, help=f"worker threads (default: {d['threads']})")
    group.add_argument("--delta", type=float, default=None, help=f"target failure probability (default: {d['delta']})")
    group.add_argument("--A", dest="A", type=float, default=None, help=f"constant in n = d - A sqrt(d log d) (default: {d['A']})")
    group.add_argument("--C", dest="C", type=float, default=None, help=f"regime constant (default: {d['C']})")
    group.add_argument("--C0", dest="C0", type=float, default=None, help=f"Lipschitz constant factor (default: {d['C0']})")
    group.add_argument("--C1", dest="C1", type=float, default=None, help=f"Hessian Descent step constant (default: {d['C1']})")
    group.add_argument("--c0", dest="c0", type=float, default=None, help=f"energy floor exponent (default: {d['c0']})")
    group.add_argument("--C0-prime", dest="C0_prime", type=float, default=None, help=f"Hessian Descent iteration-budget constant (default: {d['C0_prime']})")
    group.add_argument("--u1", type=float, default=None, help=f"MSS u1 for finite regimes (default: {d['u1']})")
    group.add_argument("--u2", type=float, default=None, help=f"MSS u2 for finite regimes (default: {d['u2']})")
    group.add_argument("--u3", type=float, default=None, help=f"MSS u3 for finite regimes (default: {d['u3']:g})")
    group.add_argument("--mss-delta", type=float, default=None, help=f"MSS grid-depth delta (default: {d['mss_delta']})")
    group.add_argument("--k0", type=int, default=None, help="override the MSS grid depth")
    group.add_argument("--max-blocks", type=int, default=None, help="cap on MSS block visits")
    group.add_argument("--hd-max-iters", type=int, default=None, help="cap on Hessian Descent iterations")
    group.add_argument("--energy-floor", type=float, default=None, help="override the Hessian Descent stopping energy")
    group.add_argument("--cert-mode", choices=CERT_MODES, default=None, help=f"certification mode (default: {d['cert_mode']})")
    group.add_argument("--cert-steps", type=int, default=None, help=f"Newton steps in empirical certification (default: {d['cert_steps']})")
    return parser


def _env_seed(env: Mapping[str, str]) -> int | None:
    raw = env.get(SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def resolve(args: argparse.Namespace, config: dict, env: Mapping[str, str] | None = None) -> dict:
    """Resolve values with priority: CLI flag > config file > environment (seed) > default."""
    env = os.environ if env is None else env
    resolved = {}
    for key, default in DEFAULTS.items():
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            resolved[key] = cli_val
        elif key in config:
            resolved[key] = config[key]
        elif key == "seed":
            env_seed = _env_seed(env)
            resolved[key] = default if env_seed is None else env_seed
        else:
            resolved[key] = default
    return resolved


def build_solver_config(r: dict, mode: str = "auto", quiet: bool = True) -> SolverConfig:
    """Build SolverConfig from resolved config dict."""
    return SolverConfig(
        delta=float(r["delta"]),
        delta_prime=float(r["delta_prime"]),
        delta0=float(r["delta0"]),
        mode=mode,
        seed=int(r["seed"]),
        threads=int(r["threads"]),
        quiet=quiet,
        A=float(r["A"]),
        C=float(r["C"]),
        C0=float(r["C0"]),
        C1=float(r["C1"]),
        c0=float(r["c0"]),
        c=float(r["c"]),
        C0_prime=float(r["C0_prime"]),
        C_dprime=float(r["C_dprime"]),
        u1=float(r["u1"]),
        u2=float(r["u2"]),
        u3=float(r["u3"]),
        mss_delta=float(r["mss_delta"]),
        k0_override=None if r["k0"] is None else int(r["k0"]),
        max_blocks=None if r["max_blocks"] is None else int(r["max_blocks"]),
        hd_max_iters=None if r["hd_max_iters"] is None else int(r["hd_max_iters"]),
        energy_floor=None if r["energy_floor"] is None else float(r["energy_floor"]),
        rank_tol=float(r["rank_tol"]),
        unit_tol=float(r["unit_tol"]),
        cert_mode=r["cert_mode"],
        cert_steps=int(r["cert_steps"]),
    )


def parse_int_list(s: str) -> list[int]:
    """Parse "2,3,3" -> [2, 3, 3]."""
    parts = [p.strip() for p in str(s).split(",") if p.strip()]
    if not parts:
        raise ValueError(f"expected a comma-separated list of integers, got {s!r}")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"expected a comma-separated list of integers, got {s!r}") from None


def parse_float_list(s: str) -> list[float]:
    """Parse "0.6,0.8,0" -> [0.6, 0.8, 0.0]."""
    parts = [p.strip() for p in str(s).split(",") if p.strip()]
    if not parts:
        raise ValueError(f"expected a comma-separated list of numbers, got {s!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ValueError(f"expected a comma-separated list of numbers, got {s!r}") from None
