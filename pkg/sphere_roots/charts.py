"""Chart generation for solver traces and ensemble statistics."""

from collections.abc import Sequence
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from sphere_roots.monte_carlo import BenchRow, RootCountResult

ENERGY_COLOR = "#1f77b4"
PRE_PROJECTION_COLOR = "#ff7f0e"
FLOOR_COLOR = "#d62728"


def _save(fig, output_path: Path, stem: str, name: str) -> Path:
    output_path.mkdir(parents=True, exist_ok=True)
    suffix = f"-{name}" if name else ""
    filepath = output_path / f"{stem}{suffix}.png"
    fig.savefig(filepath, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return filepath


def plot_energy_trace(
    energy_trace: Sequence[float],
    output_path: Path,
    name: str = "",
    pre_projection_trace: Sequence[float] | None = None,
    energy_floor: float | None = None,
) -> Path:
    """Semi-log plot of H along a Hessian Descent run.

    Args:
        energy_trace: H(x_0), H(x_1), ...
        output_path: directory to save the PNG.
        name: optional filename suffix ("seed7" -> "energy_trace-seed7.png").
        pre_projection_trace: H(y_1), H(y_2), ... before normalization.
        energy_floor: drawn as a horizontal line when given.

    Returns:
        Path to the generated PNG file.
    """
    if not energy_trace:
        raise ValueError("energy_trace is empty")
    fig, ax = plt.subplots(figsize=(10, 5))
    steps = range(len(energy_trace))
    ax.semilogy(steps, [max(h, 1e-300) for h in energy_trace], color=ENERGY_COLOR, linewidth=1.5, label="H(x_i)")
    if pre_projection_trace:
        ax.semilogy(
            range(1, len(pre_projection_trace) + 1),
            [max(h, 1e-300) for h in pre_projection_trace],
            color=PRE_PROJECTION_COLOR, linewidth=0.8, alpha=0.7, label="H(y_i)",
        )
    if energy_floor is not None and energy_floor > 0:
        ax.axhline(energy_floor, color=FLOOR_COLOR, linestyle="--", linewidth=1, label="floor")
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy")
    ax.set_title("Hessian Descent energy")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right", fontsize=9)
    fig.tight_layout()
    return _save(fig, output_path, "energy_trace", name)


def plot_bench_scaling(rows: Sequence[BenchRow], output_path: Path, name: str = "") -> Path:
    """Wall time and iterations against d on log-log axes."""
    if not rows:
        raise ValueError("no bench rows to plot")
    fig, (ax_t, ax_i) = plt.subplots(1, 2, figsize=(14, 5))
    dims = [r.d for r in rows]
    ax_t.loglog(dims, [r.seconds for r in rows], "o", color=ENERGY_COLOR, alpha=0.6)
    ax_i.loglog(dims, [max(r.iterations, 1) for r in rows], "o", color=PRE_PROJECTION_COLOR, alpha=0.6)
    ax_t.set_xlabel("d")
    ax_t.set_ylabel("seconds")
    ax_i.set_xlabel("d")
    ax_i.set_ylabel("iterations")
    for ax in (ax_t, ax_i):
        ax.grid(True, which="both", alpha=0.3)
    fig.suptitle(f"Hessian Descent scaling ({len(rows)} runs)", fontsize=14)
    fig.tight_layout()
    return _save(fig, output_path, "bench_scaling", name)


def plot_rootcount_histogram(result: RootCountResult, output_path: Path, name: str = "") -> Path:
    """Histogram of per-system root counts with the expected count marked."""
    hist = result.histogram()
    if not hist:
        raise ValueError("root count result has no samples")
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.bar(list(hist), list(hist.values()), width=0.8, color=ENERGY_COLOR, alpha=0.8)
    ax.axvline(result.target, color=FLOOR_COLOR, linestyle="--", label=f"expected {result.target:.3f}")
    ax.axvline(result.mean, color=PRE_PROJECTION_COLOR, label=f"mean {result.mean:.3f}")
    ax.set_xlabel("roots on the sphere")
    ax.set_ylabel("systems")
    ax.set_title(f"Root counts, d={result.d}, p={result.degree}, N={result.trials:,}")
    ax.legend(fontsize=9)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    return _save(fig, output_path, "rootcount", name)
