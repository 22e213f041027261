"""Deterministic CSV/JSON output with a schema header, written atomically."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

SCHEMA_VERSION = 1
HEADER = f"# kgzlab-schema: {SCHEMA_VERSION}"


def fmt(value):
    """Shortest round-trip text for floats; ``nan``/``inf`` spelled out."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(float(value))
    if hasattr(value, "item"):
        return fmt(value.item())
    return str(value)


def csv_text(columns, rows, meta=None) -> str:
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    for key, val in (meta or {}).items():
        buf.write(f"# {key}: {fmt(val)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return fmt(obj)
    return obj


def json_text(payload) -> str:
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(_clean(payload))
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_atomic(path, text: str):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path):
    """Return ``(columns, rows)`` of a file written by :func:`csv_text`."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    cols = next(reader)
    return cols, [row for row in reader]
