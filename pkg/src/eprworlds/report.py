"""Serialization of results to JSON (17 significant digits) and CSV."""

from __future__ import annotations

import csv
import io
import json
import math

from .binning import BinReport
from .correlation import BellVerdict, CorrelationResult, ScanTable
from .experiment import ExperimentReport
from .spin import Direction
from .worlds import WorldCensus

SCHEMA_ID = "eprworlds-report/1"
SCAN_COLUMNS = ("theta_deg", "E_world_counting", "E_operator")
SCAN_LHV_COLUMNS = SCAN_COLUMNS + ("E_lhv", "lhv_stderr")


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    if x == 0.0:
        # keep the output free of "-0"
        return "0"
    return format(x, ".17g")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    out: list[str] = []

    def emit(o, level):
        pad = "\n" + " " * (indent * (level + 1))
        end = "\n" + " " * (indent * level)
        if o is None or isinstance(o, bool):
            out.append(json.dumps(o))
        elif isinstance(o, int):
            out.append(str(o))
        elif isinstance(o, float):
            out.append(fmt_float(o))
        elif isinstance(o, str):
            out.append(json.dumps(o, ensure_ascii=False))
        elif isinstance(o, dict):
            if not o:
                out.append("{}")
                return
            out.append("{")
            for i, (k, v) in enumerate(o.items()):
                out.append(("," if i else "") + pad + json.dumps(str(k)) + ": ")
                emit(v, level + 1)
            out.append(end + "}")
        elif isinstance(o, (list, tuple)):
            if not o:
                out.append("[]")
                return
            if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in o):
                out.append("[" + ", ".join(fmt_float(v) if isinstance(v, float) else str(v) for v in o) + "]")
                return
            out.append("[")
            for i, v in enumerate(o):
                out.append(("," if i else "") + pad)
                emit(v, level + 1)
            out.append(end + "]")
        else:
            raise TypeError(f"cannot serialize {type(o).__name__}")

    emit(obj, 0)
    return "".join(out) + "\n"


def direction_json(d: Direction) -> dict:
    polar, azimuth = d.degrees
    return {"polar_deg": polar, "azimuth_deg": azimuth, "vector": [float(c) for c in d.vector]}


def correlation_json(r: CorrelationResult) -> dict:
    return {
        "axes": [direction_json(a) for a in r.axes],
        "value": r.value,
        "method": r.method.value,
        "stderr": r.stderr,
        "samples": r.samples,
    }


def census_json(c: WorldCensus) -> dict:
    branches = []
    for branch, count in c.branches:
        dev1, dev2, comp = branch.records
        branches.append(
            {
                "device1": dev1.tag,
                "device2": dev2.tag,
                "comparison": None if comp.pair is None else comp.tag,
                "amplitude": {"re": branch.amplitude.real, "im": branch.amplitude.imag},
                "weight": branch.weight,
                "world_count": count,
                "born_weight": count / c.total_worlds,
            }
        )
    return {"total_worlds": c.total_worlds, "approximation_error": c.approximation_error, "branches": branches}


def bell_json(v: BellVerdict) -> dict:
    return {
        "triple": [direction_json(d) for d in v.triple],
        "p12": correlation_json(v.p12),
        "p13": correlation_json(v.p13),
        "p23": correlation_json(v.p23),
        "lhs": v.lhs,
        "rhs": v.rhs,
        "margin": v.margin,
        "gap": v.gap,
        "violated": v.violated,
    }


def scan_json(t: ScanTable) -> dict:
    rows = []
    for r in t.rows:
        row = {"theta_deg": r.theta_deg, "E_world_counting": r.e_world_counting, "E_operator": r.e_operator}
        if t.lhv_strategy is not None:
            row.update(E_lhv=r.e_lhv, lhv_stderr=r.lhv_stderr)
        rows.append(row)
    return {"lhv_strategy": t.lhv_strategy, "max_path_disagreement": t.max_path_disagreement, "rows": rows}


def payload_json(payload) -> dict | list:
    if isinstance(payload, WorldCensus):
        return census_json(payload)
    if isinstance(payload, BellVerdict):
        return bell_json(payload)
    if isinstance(payload, CorrelationResult):
        return correlation_json(payload)
    if isinstance(payload, ScanTable):
        return scan_json(payload)
    if isinstance(payload, list):
        return [payload_json(p) for p in payload]
    raise TypeError(f"no serializer for {type(payload).__name__}")


def experiment_json(report: ExperimentReport) -> dict:
    steps = [
        {
            "index": s.index,
            "action": s.action,
            "device": s.device,
            "axis": None if s.axis is None else direction_json(s.axis),
            "terms": s.terms,
        }
        for s in report.steps
    ]
    results = [{"analysis": r.kind, "line": r.line, "data": payload_json(r.payload)} for r in report.results]
    return {
        "schema": SCHEMA_ID,
        "kind": "experiment",
        "plan": report.plan_echo,
        "steps": steps,
        "results": results,
        "notes": list(report.notes),
        "provenance": dict(report.provenance),
    }


def bin_json(report: BinReport, provenance: dict) -> dict:
    return {
        "schema": SCHEMA_ID,
        "kind": "bin",
        "total_runs": report.total_runs,
        "resolution_deg": report.resolution_deg,
        "max_denominator": report.max_denominator,
        "max_census_error": report.max_census_error,
        "discarded_runs": report.discarded_runs,
        "pooled": {"runs": report.total_runs, "mean_product": report.pooled_mean, "stderr": report.pooled_stderr},
        "bins": [
            {
                "theta_center": b.theta_center,
                "tolerance": b.tolerance,
                "runs": b.runs,
                "mean_product": b.mean_product,
                "stderr": b.stderr,
                "expected": b.expected,
                "discretization_bound": b.discretization_bound,
            }
            for b in report.bins
        ],
        "provenance": provenance,
    }


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def scan_csv(t: ScanTable) -> str:
    if t.lhv_strategy is None:
        return _csv_text(SCAN_COLUMNS, ((r.theta_deg, r.e_world_counting, r.e_operator) for r in t.rows))
    return _csv_text(
        SCAN_LHV_COLUMNS,
        ((r.theta_deg, r.e_world_counting, r.e_operator, r.e_lhv, r.lhv_stderr) for r in t.rows),
    )


def bin_csv(report: BinReport) -> str:
    rows = [
        (b.theta_center, b.tolerance, b.runs, b.mean_product, b.stderr, b.expected, b.discretization_bound)
        for b in report.bins
    ]
    rows.append(("pooled", "", report.total_runs, report.pooled_mean, report.pooled_stderr, 0.0, ""))
    return _csv_text(
        ("theta_center", "tolerance", "runs", "mean_product", "stderr", "expected", "discretization_bound"), rows
    )


def _flatten(prefix, obj):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(f"{prefix}.{k}" if prefix else str(k), v)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(f"{prefix}.{i}", v)
    else:
        yield prefix, obj


def experiment_csv(report: ExperimentReport) -> str:
    """Long format: one ``analysis,line,field,value`` row per scalar."""
    rows = []
    for r in report.results:
        for key, value in _flatten("", payload_json(r.payload)):
            if isinstance(value, bool):
                value = str(value).lower()
            rows.append((r.kind, r.line, key, value))
    return _csv_text(("analysis", "line", "field", "value"), rows)
