"""Deterministic JSON / CSV / text rendering of power reports."""

from __future__ import annotations

import csv
import io
import json
import math

from .analysis import EntropyRow, PowerReport

SIG_DIGITS = 12

CSV_HEADER = ("param", "ncf_analytic", "ncf_mc", "stderr", "power", "bound", "verdict")

POWER_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "PowerReport",
    "type": "object",
    "additionalProperties": False,
    "required": [
        "protocol", "params", "dimension", "ensemble", "samples", "seed", "average_ncf",
        "average_ncf_analytic", "average_ncf_mc", "average_ncf_stderr", "control_power",
        "classical_limit", "power_bound", "verdict", "verdict_tolerance", "success_probability",
        "controller_entropy", "entropy_required", "entropy_verdict",
    ],
    "properties": {
        "protocol": {"type": "string", "pattern": "^P[1-7]$"},
        "params": {"type": "object"},
        "dimension": {"type": "integer", "minimum": 2},
        "ensemble": {"enum": ["haar", "equatorial", "fixed"]},
        "samples": {"type": "integer", "minimum": 0},
        "seed": {"type": ["integer", "null"]},
        "average_ncf": {"type": "number", "minimum": 0, "maximum": 1},
        "average_ncf_analytic": {"type": ["number", "null"]},
        "average_ncf_mc": {"type": ["number", "null"]},
        "average_ncf_stderr": {"type": ["number", "null"], "minimum": 0},
        "control_power": {"type": "number"},
        "classical_limit": {"type": "number"},
        "power_bound": {"type": "number"},
        "verdict": {"enum": ["acceptable", "insufficient"]},
        "verdict_tolerance": {"type": "number", "minimum": 0},
        "success_probability": {"type": ["number", "null"]},
        "controller_entropy": {"type": "object", "additionalProperties": {"type": "number"}},
        "entropy_required": {"type": "number"},
        "entropy_verdict": {"enum": ["pass", "fail"]},
    },
}


def fmt(x) -> str:
    """Render a float with 12 significant digits; None renders empty."""
    if x is None:
        return ""
    return format(float(x), f".{SIG_DIGITS}g")


def _round(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite value {obj!r} in report")
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def report_dict(report: PowerReport) -> dict:
    return _round(report.to_dict())


def to_json(report: PowerReport | list[PowerReport]) -> str:
    if isinstance(report, list):
        payload = [report_dict(r) for r in report]
    else:
        payload = report_dict(report)
    return json.dumps(payload, indent=2, sort_keys=True)


def csv_row(report: PowerReport, param: str | None = None) -> list[str]:
    value = report.params.get(param, "") if param else ""
    value = fmt(value) if isinstance(value, float) else str(value)
    return [value, fmt(report.average_ncf_analytic), fmt(report.average_ncf_mc),
            fmt(report.average_ncf_stderr), fmt(report.control_power), fmt(report.power_bound),
            report.verdict]


def to_csv(reports: list[PowerReport], param: str | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(csv_row(r, param))
    return buf.getvalue()


def to_text(report: PowerReport) -> str:
    d = report.to_dict()
    lines = []
    for k, v in d.items():
        if isinstance(v, float):
            v = fmt(v)
        elif isinstance(v, dict):
            v = ", ".join(f"{kk}={fmt(vv) if isinstance(vv, float) else vv}" for kk, vv in v.items())
        lines.append(f"{k:22s} {v}")
    return "\n".join(lines) + "\n"


def entropy_table_text(rows: list[EntropyRow]) -> str:
    lines = [f"{'State':6s} {'S(rho_A)':>14s} {'S(rho_B)':>14s} {'S(rho_C)':>14s}"]
    for r in rows:
        cells = [f"{s:.3f} ({c})" for s, c in zip(r.entropies, r.classes)]
        lines.append(f"{r.name:6s} " + " ".join(f"{c:>14s}" for c in cells))
    return "\n".join(lines) + "\n"


def entropy_table_json(rows: list[EntropyRow]) -> str:
    payload = [{"state": r.name, "entropies": _round(list(r.entropies)), "classes": list(r.classes)}
               for r in rows]
    return json.dumps(payload, indent=2, sort_keys=True)


def entropy_table_csv(rows: list[EntropyRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["state", "S_A", "S_B", "S_C", "class_A", "class_B", "class_C"])
    for r in rows:
        w.writerow([r.name, *(fmt(s) for s in r.entropies), *r.classes])
    return buf.getvalue()
