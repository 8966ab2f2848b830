"""Deterministic text encoding shared by every report writer.

Floats are written with 17 significant digits so that values survive a
text round trip bit-for-bit; mapping keys are emitted in sorted order.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    if x == 0.0:
        return "0"  # drops the sign of -0.0
    return "%.17g" % x


def dumps(obj: Any, indent: int = 2) -> str:
    """Canonical JSON text (sorted keys, fixed float format, trailing newline)."""
    return _encode(obj, indent, 0) + "\n"


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return _encode_str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{_encode_str(str(k))}: {_encode(obj[k], indent, level + 1)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    # numpy scalars and similar
    if hasattr(obj, "item"):
        return _encode(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _encode_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=True)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """RFC 4180 CSV with CRLF line endings; floats use :func:`fmt_float`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
