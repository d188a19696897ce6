"""Deterministic serialization: fixed field order, 17-significant-digit floats.

Outputs must be byte-identical across reruns with the same seed, so floats are
rendered with an explicit format instead of repr, and JSON is emitted by a
small writer with no whitespace variation.
"""

from __future__ import annotations

import json
import math


def float_repr(x: float) -> str:
    """17 significant digits: round-trips every double exactly."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def canonical_json(obj) -> str:
    """Compact JSON with deterministic float rendering and insertion order."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return float_repr(obj)
    if isinstance(obj, dict):
        parts = (f"{json.dumps(str(k))}:{canonical_json(v)}" for k, v in obj.items())
        return "{" + ",".join(parts) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    # numpy scalars and anything float-like
    if hasattr(obj, "item"):
        return canonical_json(obj.item())
    raise TypeError(f"cannot serialize {type(obj)!r}")


def csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return float_repr(value)
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return " ".join(csv_cell(v) for v in value)
    return str(value)
