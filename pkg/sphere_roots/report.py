"""JSON documents and plain-text tables for command output."""

from __future__ import annotations

import json
import math
import sys
from collections.abc import Mapping, Sequence
from pathlib import Path

from sphere_roots.params import SCHEMA_VERSION
from sphere_roots.polysys import GenerationRecord, PolynomialSystem, system_from_dict

RULE = "─" * 72


def with_schema(doc: Mapping) -> dict:
    out = {"schema_version": SCHEMA_VERSION}
    out.update(doc)
    return out


def dumps(doc: Mapping) -> str:
    return json.dumps(with_schema(doc), indent=2, allow_nan=True)


def write_json(doc: Mapping, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc) + "\n", encoding="utf-8")
    return path


def read_json(path: Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: invalid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    return doc


def load_system(path: Path) -> tuple[PolynomialSystem, dict]:
    """System from a "system" or "generation" document, plus an input descriptor."""
    doc = read_json(path)
    kind = doc.get("kind")
    if kind == "system":
        system = system_from_dict(doc)
        return system, {"kind": "system", "path": str(path), "d": system.d, "degrees": list(system.degrees)}
    if kind == "generation":
        record = GenerationRecord.from_dict(doc)
        return record.regenerate(), record.to_dict() | {"path": str(path)}
    raise ValueError(f"{path}: expected kind 'system' or 'generation', got {kind!r}")


def strip_timings(doc: Mapping) -> dict:
    """Copy of a run document without wall-clock fields."""
    out = {k: v for k, v in doc.items() if k != "timings"}
    if "runs" in out:
        out["runs"] = [{k: v for k, v in r.items() if k != "seconds"} for r in out["runs"]]
    return out


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return str(v)
        return f"{v:.4g}"
    return str(v)


def format_table(headers: Sequence[str], rows: Sequence[Sequence], title: str = "") -> str:
    """Right-aligned fixed-width table."""
    cells = [[_fmt(v) for v in row] for row in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) + 2 for i, h in enumerate(headers)]
    lines = []
    if title:
        lines.append(f"【{title}】")
    lines.append(RULE)
    lines.append("".join(f"{h:>{w}}" for h, w in zip(headers, widths)))
    lines.append(RULE)
    for r in cells:
        lines.append("".join(f"{c:>{w}}" for c, w in zip(r, widths)))
    lines.append(RULE)
    return "\n".join(lines)


def format_run_report(doc: Mapping) -> str:
    lines = [
        f"regime {doc['regime']}  algorithm {doc['algorithm']}  n={doc['n']}",
        f"reason: {doc['reason']}",
    ]
    if doc["outcome"] is None:
        lines.append("outcome: FALSE")
    else:
        lines.append("outcome: [" + ", ".join(f"{v:.12g}" for v in doc["outcome"]) + "]")
    cert = doc.get("certification")
    if cert is not None:
        status = "certified" if cert["certified"] else "not certified"
        lines.append(f"certification ({cert['label']}): {status}, {cert['reason']}")
    if doc.get("failure_bound") is not None:
        lines.append(f"failure bound: {doc['failure_bound']:.4g}")
    for w in doc.get("warnings", []):
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def format_rootcount(doc: Mapping) -> str:
    lo, hi = doc["interval"]
    rows = [[doc["d"], doc["degree"], doc["trials"], doc["mean"], doc["se"], lo, hi, doc["target"], doc["bezout"]]]
    table = format_table(
        ["d", "p", "trials", "mean", "se", "ci_lo", "ci_hi", "target", "bezout"],
        rows, "root count",
    )
    hist = format_table(["roots", "systems"], [[k, v] for k, v in doc["histogram"].items()])
    return table + "\n" + hist


def format_covariance(doc: Mapping) -> str:
    rows = [[r["overlap"], r["target"], r["mean"], r["se"], r["z"], r["cross_mean"]] for r in doc["rows"]]
    return format_table(
        ["overlap", "target", "mean", "se", "z", "indep"],
        rows, f"covariance d={doc['d']} p={doc['p']} N={doc['samples']:,}",
    )


def format_lipschitz(doc: Mapping) -> str:
    rows = [[doc["samples"], doc["sup_F"], doc["sup_DF"], doc["lip_F"], doc["lip_DF"]]]
    table = format_table(["samples", "sup|F|", "sup|DF|", "Lip F", "Lip DF"], rows, "sampled Lipschitz bounds")
    if doc.get("L") is not None:
        table += f"\nMSS Lipschitz parameter L = {doc['L']:.4g}"
    return table


def format_jacobian(doc: Mapping) -> str:
    rows = [
        [r["degree"], r["mean"], r["variance"], r["variance_se"], r["z"], r["value_cross"], r["value_cross_se"]]
        for r in doc["rows"]
    ]
    return format_table(
        ["p_i", "mean", "var", "var_se", "z", "F*DF", "se"],
        rows, f"tangent Jacobian law d={doc['d']} N={doc['samples']:,}",
    )


def format_rotation(doc: Mapping) -> str:
    rows = [[doc["d"], doc["degree"], doc["samples"], doc["statistic"], doc["pvalue"], doc["variance_base"], doc["variance_rotated"]]]
    return format_table(["d", "p", "samples", "KS", "p-value", "var x0", "var Ox0"], rows, "rotational invariance")


def format_bench(summary: Sequence[Mapping]) -> str:
    rows = [[s["d"], s["n"], s["runs"], s["solved"], s["median_seconds"], s["median_iterations"]] for s in summary]
    return format_table(["d", "n", "runs", "solved", "median s", "median iters"], rows, "Hessian Descent bench")


def emit(doc: Mapping, text: str, out: Path | None = None, as_json: bool = False) -> None:
    """JSON to `out` (or stdout when `as_json`), the text table to stdout otherwise."""
    if out is not None:
        path = write_json(doc, out)
        print(f"wrote {path}", file=sys.stderr)
    if as_json:
        print(dumps(doc))
    else:
        print(text)
