"""Deterministic JSON and CSV emission for suite reports."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path


class ReportError(OSError):
    pass


_NUMBER = {"type": ["number", "string"]}  # non-finite values are written as strings

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["case", "lhs", "rhs", "margin", "tolerance", "bound", "passed", "params"],
    "properties": {"case": {"type": "string"}, "lhs": _NUMBER, "rhs": _NUMBER, "margin": _NUMBER,
                   "tolerance": _NUMBER, "bound": _NUMBER, "passed": {"type": "boolean"},
                   "params": {"type": "object"}},
    "additionalProperties": False,
}

SUITE_SCHEMA = {
    "type": "object",
    "required": ["name", "passed", "n_instances", "n_failed", "instances", "tolerances", "seeds", "notes"],
    "properties": {"name": {"type": "string"}, "passed": {"type": "boolean"},
                   "n_instances": {"type": "integer"}, "n_failed": {"type": "integer"},
                   "instances": {"type": "array", "items": INSTANCE_SCHEMA},
                   "tolerances": {"type": "object", "additionalProperties": _NUMBER},
                   "seeds": {"type": "object"}, "notes": {"type": "array", "items": {"type": "string"}},
                   "wall_time": {"type": "number"}},
    "additionalProperties": False,
}

# JSON Schema of the document written by ``verify`` (and ``emit_report(..., "json")``)
REPORT_SCHEMA = {
    "type": "object",
    "required": ["passed", "config", "suites"],
    "properties": {"passed": {"type": "boolean"}, "config": {"type": "object"},
                   "suites": {"type": "object", "additionalProperties": SUITE_SCHEMA}},
    "additionalProperties": False,
}


def _canon(x):
    """Plain Python containers; non-finite floats become strings."""
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, dict):
        return {str(k): _canon(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_canon(v) for v in x]
    if hasattr(x, "item") and callable(x.item):
        return _canon(x.item())
    return x


def _fmt(x) -> str:
    return format(x, ".17g") if isinstance(x, float) else str(x)


def _iter(o):
    # sorted keys and 17 significant digits, so equal reports give equal bytes
    if isinstance(o, dict):
        yield "{"
        for i, k in enumerate(sorted(o)):
            if i:
                yield ", "
            yield json.dumps(k)
            yield ": "
            yield from _iter(o[k])
        yield "}"
    elif isinstance(o, list):
        yield "["
        for i, v in enumerate(o):
            if i:
                yield ", "
            yield from _iter(v)
        yield "]"
    elif isinstance(o, float):
        yield _fmt(o)
    else:
        yield json.dumps(o)


def to_json(report, timing: bool = False) -> str:
    d = report.to_dict(timing) if hasattr(report, "to_dict") else report
    return "".join(_iter(_canon(d))) + "\n"


CSV_FIELDS = ("suite", "case", "lhs", "rhs", "margin", "tolerance", "bound", "passed")


def _rows(report):
    d = report.to_dict() if hasattr(report, "to_dict") else report
    suites = d["suites"] if "suites" in d else {d["name"]: d}
    for name in sorted(suites):
        for inst in suites[name]["instances"]:
            yield [name] + [inst[k] for k in CSV_FIELDS[1:]]


def to_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for row in _rows(report):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def emit_report(report, path, fmt: str = "json", timing: bool = False) -> None:
    """Write ``report`` as ``json`` (sorted keys, 17 significant digits) or ``csv``
    (one row per instance); overwriting gives byte-identical files."""
    if fmt not in ("json", "csv"):
        raise ValueError("format must be 'json' or 'csv'")
    text = to_json(report, timing) if fmt == "json" else to_csv(report)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc.strerror or exc}") from None
