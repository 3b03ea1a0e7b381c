"""Deterministic report serialization.

Reports are JSON with insertion-ordered keys and floats printed at 17
significant digits, so identical manifests and seeds produce byte-identical
files.  A CSV projection flattens the per-point table for plotting.
"""

from __future__ import annotations

import hashlib
import io
import math


def _format_float(value):
    if value != value:  # nan
        return "null"
    if math.isinf(value):
        return "null"
    text = format(value, ".17g")
    # keep it a JSON number (format can emit "1e+20" which is fine)
    return text


def json_dumps(obj, indent=0):
    """Serialize with stable key order and fixed float formatting."""
    pad = "  " * indent
    child_pad = "  " * (indent + 1)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return _escape(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{child_pad}{_escape(str(k))}: {json_dumps(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        simple = all(isinstance(v, (int, float, str, bool, type(None)))
                     for v in seq)
        if simple:
            return "[" + ", ".join(json_dumps(v) for v in seq) + "]"
        parts = [f"{child_pad}{json_dumps(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    try:
        return json_dumps(float(obj), indent)
    except (TypeError, ValueError):
        raise TypeError(f"cannot serialize {type(obj).__name__}") from None


def _escape(text):
    out = io.StringIO()
    out.write('"')
    for ch in text:
        if ch == '"':
            out.write('\\"')
        elif ch == "\\":
            out.write("\\\\")
        elif ch == "\n":
            out.write("\\n")
        elif ch == "\t":
            out.write("\\t")
        elif ord(ch) < 0x20:
            out.write(f"\\u{ord(ch):04x}")
        else:
            out.write(ch)
    out.write('"')
    return out.getvalue()


def manifest_hash(doc):
    return "sha256:" + hashlib.sha256(
        json_dumps(doc).encode("utf-8")).hexdigest()


def write_report(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json_dumps(report))
        fh.write("\n")


CSV_BASE_COLUMNS = ("b_squared", "lambda_mean", "lambda_spread",
                    "closed_form_curvature", "reversibility_residual")


def report_csv(report):
    """Flat per-point table: coordinates, b^2, Einstein scalar, curvature."""
    samples = report.get("samples", [])
    if not samples:
        return ""
    dim = len(samples[0]["x"])
    header = [f"x{i + 1}" for i in range(dim)]
    header += list(CSV_BASE_COLUMNS)
    lines = [",".join(header)]
    for sample in samples:
        row = [_format_float(v) for v in sample["x"]]
        for col in CSV_BASE_COLUMNS:
            value = sample.get(col)
            row.append("" if value is None else _format_float(value))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_csv(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report_csv(report))
