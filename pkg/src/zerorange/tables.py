"""Deterministic CSV/JSON tables with full round-trip precision."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

__all__ = ["emit_table", "read_table", "format_real", "TableIOError"]


class TableIOError(OSError):
    """Writing or reading a table failed; the message names the path."""


def format_real(x) -> str:
    """17 significant digits; ``nan``/``inf``/``-inf`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_real(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float):
        if math.isfinite(v):
            return v
        return format_real(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def _columns(rows, columns):
    if columns is not None:
        return list(columns)
    if not rows:
        return []
    cols = list(rows[0].keys())
    for r in rows[1:]:
        if list(r.keys()) != cols:
            raise ValueError("rows must share the same columns in the same order")
    return cols


def render_table(rows, fmt="csv", metadata=None, columns=None) -> str:
    rows = list(rows)
    cols = _columns(rows, columns)
    metadata = dict(metadata or {})
    if fmt == "csv":
        buf = io.StringIO()
        for k, v in metadata.items():
            buf.write(f"# {k}={_cell(v)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        if cols:
            writer.writerow(cols)
        for r in rows:
            writer.writerow([_cell(r[c]) for c in cols])
        return buf.getvalue()
    if fmt == "json":
        # python floats serialize with shortest round-trip repr, which is exact
        doc = {"metadata": _json_value(metadata), "columns": cols,
               "rows": [{c: _json_value(r[c]) for c in cols} for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")


def emit_table(rows, fmt="csv", path=None, metadata=None, columns=None) -> str:
    """Write ``rows`` (a list of dicts with identical keys) to ``path``.

    CSV output starts with ``# key=value`` metadata lines followed by a header
    row; reals are written with 17 significant digits.  JSON output is an
    object with ``metadata``, ``columns`` and ``rows``.  With ``path=None``
    the rendered text is only returned.
    """
    text = render_table(rows, fmt, metadata, columns)
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise TableIOError(f"cannot write table to {path}: {exc.strerror or exc}") from exc
    return text


def _parse_cell(s):
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    if s in ("true", "false"):
        return s == "true"
    return s


def read_table(path_or_text, fmt="csv"):
    """Inverse of :func:`emit_table`; returns ``(metadata, rows)``."""
    text = path_or_text
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text):
        try:
            text = Path(path_or_text).read_text(encoding="utf-8")
        except OSError as exc:
            raise TableIOError(f"cannot read table from {path_or_text}: {exc}") from exc
    if fmt == "json":
        doc = json.loads(text)
        return doc["metadata"], doc["rows"]
    lines = text.splitlines()
    meta = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        k, _, v = lines[i][1:].strip().partition("=")
        meta[k] = _parse_cell(v)
        i += 1
    body = list(csv.reader(lines[i:]))
    if not body:
        return meta, []
    cols = body[0]
    return meta, [{c: _parse_cell(v) for c, v in zip(cols, r)} for r in body[1:]]
