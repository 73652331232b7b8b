"""JSON and CSV emission with 17-significant-digit floats.

The standard ``json`` module always writes ``repr`` floats, so we serialize
numbers ourselves; everything else goes through ``json.dumps``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

__all__ = ["dumps", "write_json", "format_number", "strip_runtime"]


def format_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"  # JSON has no nan / inf
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "as_dict"):
        return obj.as_dict()
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, int, float, np.bool_)):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        flat = all(isinstance(_plain(v), (int, float, bool, np.number)) or _plain(v) is None for v in obj)
        if flat:
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(obj, path) -> Path:
    p = Path(path)
    p.write_text(dumps(obj) + "\n")
    return p


def strip_runtime(obj):
    """Copy of a report without its ``runtime`` fields (for determinism checks)."""
    obj = _plain(obj)
    if isinstance(obj, dict):
        return {k: strip_runtime(v) for k, v in obj.items() if k != "runtime"}
    if isinstance(obj, (list, tuple)):
        return [strip_runtime(v) for v in obj]
    return obj
