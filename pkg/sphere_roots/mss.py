"""Multi-Scale Search over dyadic subcubes of [-1, 1]^d.

A block at level k is corner + [0, 2^-k]^d. Corners are stored as exact
integers in units of half the block side, h = 2^-(k+1), so the root block
(level -1, side 2) has index (-1, ..., -1) and children are obtained with
integer arithmetic at any depth:

    child.index = 2 * parent.index + 2 * offset,  offset in {0, 1}^d.
"""

from __future__ import annotations

import itertools
import math
import sys as _sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from sphere_roots.newton import CertReport, certify
from sphere_roots.params import LOG_FLOOR, MSSRunConfig
from sphere_roots.polysys import PolynomialSystem, evaluate, jacobian, tangent_basis
from sphere_roots.spectral import s_min


@dataclass(frozen=True)
class GridBlock:
    level: int
    index: tuple[int, ...]

    def __post_init__(self):
        if self.level < -1:
            raise ValueError(f"level must be >= -1, got {self.level}")
        if self.level >= 0 and any(i % 2 for i in self.index):
            raise ValueError(f"corner of level-{self.level} block is off the dyadic grid")
        bound = 2 ** (self.level + 1)
        if any(i < -bound or i + 2 > bound for i in self.index):
            raise ValueError(f"block {self.index} at level {self.level} leaves [-1, 1]^d")

    @classmethod
    def root(cls, d: int) -> GridBlock:
        return cls(-1, (-1,) * d)

    @classmethod
    def from_corner(cls, corner, level: int) -> GridBlock:
        scale = 2 ** (level + 1)
        index = []
        for c in corner:
            v = c * scale
            if v != int(v):
                raise ValueError(f"corner {tuple(corner)} is not on the level-{level} grid")
            index.append(int(v))
        return cls(level, tuple(index))

    @property
    def d(self) -> int:
        return len(self.index)

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.level)

    @property
    def corner(self) -> np.ndarray:
        return np.array([math.ldexp(i, -(self.level + 1)) for i in self.index])

    def children(self) -> list[GridBlock]:
        """The 2^d children in lexicographic offset order."""
        return [
            GridBlock(self.level + 1, tuple(2 * i + 2 * b for i, b in zip(self.index, offset)))
            for offset in itertools.product((0, 1), repeat=self.d)
        ]


@dataclass
class BlockGeometry:
    intersects_sphere: bool
    nearest_corner: np.ndarray
    farthest_corner: np.ndarray
    projected: np.ndarray | None
    diameter: float


def block_geometry(b: GridBlock) -> BlockGeometry:
    lo = b.corner
    hi = lo + b.side
    # ties go to the left endpoint
    nearest = np.where(np.abs(lo) <= np.abs(hi), lo, hi)
    nearest = np.where((lo < 0) & (hi > 0), 0.0, nearest)
    farthest = np.where(np.abs(lo) >= np.abs(hi), lo, hi)
    n_near = float(np.linalg.norm(nearest))
    n_far = float(np.linalg.norm(farthest))
    intersects = n_near <= 1.0 <= n_far
    projected = None
    if intersects:
        projected = nearest / n_near if n_near > 0 else farthest / n_far
    return BlockGeometry(intersects, nearest, farthest, projected, math.sqrt(b.d) * b.side)


def may_hold_root(sys: PolynomialSystem, geo: BlockGeometry, L: float) -> bool:
    """Residual test at the projected point: |F(x_B)| <= L * diam(B)."""
    return float(np.linalg.norm(evaluate(sys, geo.projected))) <= geo.diameter * L


@dataclass(frozen=True)
class MSSParams:
    L: float
    S: float
    k0: int
    kappa: float
    u1: float
    u2: float
    u3: float
    log2_kappa: float = 0.0

    def to_dict(self) -> dict:
        return {
            "L": self.L, "S": self.S, "k0": self.k0, "kappa": self.kappa,
            "log2_kappa": self.log2_kappa, "u1": self.u1, "u2": self.u2, "u3": self.u3,
        }


def mss_params(
    d: int,
    p_max: int,
    u1: float,
    u2: float,
    u3: float,
    delta: float,
    C0: float = 1.0,
) -> MSSParams:
    """Grid depth, Lipschitz bound, conditioning threshold and kappa, all in log space."""
    if not 0 < u2 <= 1 <= u1:
        raise ValueError(f"need 0 < u2 <= 1 <= u1, got u1={u1}, u2={u2}")
    if u3 <= 0:
        raise ValueError(f"u3 must be positive, got {u3}")
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if d < 2 or p_max < 2 or C0 <= 0:
        raise ValueError(f"invalid d={d}, p_max={p_max}, C0={C0}")
    log_p = math.log(p_max)
    log_arg = (
        2 * math.log(u1) - math.log(delta) - math.log(u2) + math.log(C0)
        + (d / 2 + 3) * log_p + 4.5 * math.log(d) + math.log(log_p)
    )
    k0 = max(0, math.ceil(log_arg / math.log(2.0)))
    L = u1 * C0 * p_max * math.sqrt(d * log_p)
    log_S = math.log(0.5) + 0.5 * math.log(u2) - 1.5 * math.log(d) - (d / 4) * log_p
    log_kappa = (
        math.log(16.0) + math.log(u1 / u2) + math.log(C0) + 3.5 * math.log(d)
        + math.log(math.log(d)) + (d / 2 + 1) * log_p + 0.5 * math.log(log_p)
    )
    log_kappa = max(log_kappa, 0.0)
    kappa = math.exp(log_kappa) if log_kappa < 700 else math.inf
    S = math.exp(log_S) if log_S > -745 else 0.0
    return MSSParams(L, S, k0, kappa, u1, u2, u3, log_kappa / math.log(2.0))


def mss_failure_bound(params: MSSParams, d: int, p_max: int, C: float = 1.0) -> float:
    """Failure-probability surrogate for the given u's, clipped to [0, 1]."""
    u1, u2, u3 = params.u1, params.u2, params.u3
    bound = (
        2.0 * math.exp(-d * (u1 - 1.0) ** 2 / C)
        + C * u2
        + (C / u3) * max(math.log(u1), math.log(1.0 / u2), d * math.log(p_max))
    )
    return min(max(bound, 0.0), 1.0)


def log_block_budget(params: MSSParams, d: int, C0: float = 1.0) -> float:
    """log of C0 * (L sqrt(d) 2^k0)^(d-1)-style visit surrogate."""
    return math.log(C0) + (d - 1) * (math.log(params.L) + 0.5 * math.log(d) + params.k0 * math.log(2.0))


def check_floating_range(params: MSSParams, d: int) -> None:
    terminal = math.log(math.sqrt(d)) - params.k0 * math.log(2.0) + math.log(params.L)
    if params.S <= 0 or math.log(params.S) < LOG_FLOOR or terminal < LOG_FLOOR:
        raise ValueError("parameters out of floating range")


@dataclass
class MSSResult:
    outcome: np.ndarray | None
    blocks_visited: int = 0
    blocks_pruned: int = 0
    blocks_rejected: int = 0
    terminal_checks: int = 0
    certification: CertReport | None = None
    reason: str = ""
    visits: list[GridBlock] = field(default_factory=list)
    terminal_block: GridBlock | None = None

    def to_dict(self) -> dict:
        return {
            "outcome": None if self.outcome is None else self.outcome.tolist(),
            "blocks_visited": self.blocks_visited,
            "blocks_pruned": self.blocks_pruned,
            "blocks_rejected": self.blocks_rejected,
            "terminal_checks": self.terminal_checks,
            "terminal_block": None if self.terminal_block is None else {
                "level": self.terminal_block.level, "corner": self.terminal_block.corner.tolist(),
            },
            "reason": self.reason,
            "certification": None if self.certification is None else self.certification.to_dict(),
        }


def _search(
    sys: PolynomialSystem,
    params: MSSParams,
    start: GridBlock,
    cfg: MSSRunConfig,
    quiet: bool,
) -> MSSResult:
    result = MSSResult(None)
    stack = [start]
    while stack:
        if cfg.max_blocks is not None and result.blocks_visited >= cfg.max_blocks:
            result.reason = "block budget exhausted"
            return result
        block = stack.pop()
        result.blocks_visited += 1
        if cfg.record_visits:
            result.visits.append(block)
        if not quiet and result.blocks_visited % 10_000 == 0:
            print(f"\r  mss: {result.blocks_visited} blocks, level {block.level}", end="", file=_sys.stderr)
        geo = block_geometry(block)
        if not geo.intersects_sphere:
            result.blocks_rejected += 1
            continue
        x = geo.projected
        near = may_hold_root(sys, geo, params.L)
        if block.level < params.k0:
            if not near:
                result.blocks_pruned += 1
            else:
                stack.extend(reversed(block.children()))
            continue
        result.terminal_checks += 1
        if near:
            conditioning = s_min(jacobian(sys, x) @ tangent_basis(x), log2_kappa=params.log2_kappa)
            if conditioning >= params.S:
                result.outcome = x
                result.terminal_block = block
                result.reason = "terminal block accepted"
                return result
        result.blocks_rejected += 1
    result.reason = "worklist exhausted"
    return result


def mss_run(
    sys: PolynomialSystem,
    params: MSSParams,
    cfg: MSSRunConfig | None = None,
    quiet: bool = True,
) -> MSSResult:
    """Depth-first dyadic search; returns the first accepted terminal point or FALSE."""
    cfg = cfg or MSSRunConfig()
    if sys.n != sys.d - 1:
        raise ValueError(f"Multi-Scale Search needs n = d - 1, got n={sys.n}, d={sys.d}")
    check_floating_range(params, sys.d)

    root = GridBlock.root(sys.d)
    if cfg.workers <= 1:
        result = _search(sys, params, root, cfg, quiet)
    else:
        result = _parallel_search(sys, params, root, cfg)
    if not quiet:
        print(file=_sys.stderr)
    if result.outcome is not None:
        result.certification = certify(sys, result.outcome, cfg.cert)
    return result


def _parallel_search(
    sys: PolynomialSystem,
    params: MSSParams,
    root: GridBlock,
    cfg: MSSRunConfig,
) -> MSSResult:
    """Search the root's children concurrently; the lowest-index subtree with a point wins."""
    merged = MSSResult(None, blocks_visited=1)
    if cfg.record_visits:
        merged.visits.append(root)
    geo = block_geometry(root)
    if root.level < params.k0 and not may_hold_root(sys, geo, params.L):
        merged.blocks_pruned = 1
        merged.reason = "worklist exhausted"
        return merged
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        parts = list(pool.map(lambda b: _search(sys, params, b, cfg, True), root.children()))
    for part in parts:
        merged.blocks_visited += part.blocks_visited
        merged.blocks_pruned += part.blocks_pruned
        merged.blocks_rejected += part.blocks_rejected
        merged.terminal_checks += part.terminal_checks
        if cfg.record_visits:
            merged.visits.extend(part.visits)
    for part in parts:
        if part.outcome is not None:
            merged.outcome = part.outcome
            merged.terminal_block = part.terminal_block
            merged.reason = part.reason
            return merged
    budget_hit = any(p.reason == "block budget exhausted" for p in parts)
    merged.reason = "block budget exhausted" if budget_hit else "worklist exhausted"
    return merged
