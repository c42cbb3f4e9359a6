"""JSON writer that renders floats as plain decimals.

``json.dumps`` falls back to scientific notation for very small or large
floats; downstream consumers (file diffs, the what-if UI) want stable
decimal text. Values round-trip exactly: the decimal expansion of a
float's shortest repr parses back to the same float.
"""

from __future__ import annotations

import json
import math
from decimal import Decimal


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    text = repr(float(x))
    if "e" in text or "E" in text:
        text = format(Decimal(text), "f")
    return text


def dumps(obj, indent: int | None = None) -> str:
    out: list[str] = []
    _write(obj, out, indent, 0)
    return "".join(out)


def _write(obj, out: list[str], indent, level) -> None:
    if obj is None or isinstance(obj, (bool, int, str)):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, (list, tuple)):
        _write_seq(list(obj), out, indent, level, "[", "]", _write)
    elif isinstance(obj, dict):
        def write_item(kv, out, indent, level):
            k, v = kv
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be strings, got {type(k)}")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(": " if indent is not None else ":")
            _write(v, out, indent, level)

        _write_seq(list(obj.items()), out, indent, level, "{", "}", write_item)
    elif hasattr(obj, "ndim") and getattr(obj, "ndim") > 0:  # numpy array
        _write(obj.tolist(), out, indent, level)
    elif hasattr(obj, "item"):  # numpy scalar
        _write(obj.item(), out, indent, level)
    else:
        raise TypeError(f"not JSON-serializable: {type(obj)}")


def _write_seq(items, out, indent, level, open_ch, close_ch, write_item) -> None:
    if not items:
        out.append(open_ch + close_ch)
        return
    out.append(open_ch)
    inner = None if indent is None else " " * (indent * (level + 1))
    for i, item in enumerate(items):
        if i:
            out.append(",")
        if inner is not None:
            out.append("\n" + inner)
        write_item(item, out, indent, level + 1)
    if inner is not None:
        out.append("\n" + " " * (indent * level))
    out.append(close_ch)


def dump(obj, fh, indent: int | None = None) -> None:
    fh.write(dumps(obj, indent=indent))
    fh.write("\n")
