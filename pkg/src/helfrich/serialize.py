"""Deterministic JSON output with fixed float formatting.

Reports and configs are reproducibility artifacts: floats are written with
17 significant digits (full round-trip precision), keys keep insertion
order, and two runs on the same inputs produce byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

__all__ = ["dumps", "dump", "load_json"]


def _format(value, indent, level):
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = (f'{pad_in}"{k}": {_format(v, indent, level + 1)}' for k, v in value.items())
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if len(value) == 0:
            return "[]"
        items = (pad_in + _format(v, indent, level + 1) for v in value)
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v != v:
            return '"nan"'
        if v in (float("inf"), float("-inf")):
            return f'"{v}"'
        return f"{v:.17g}"
    if value is None:
        return "null"
    return json.dumps(str(value))


def dumps(obj, indent=2):
    """Serialize to a deterministic JSON string (trailing newline included)."""
    return _format(obj, indent, 0) + "\n"


def dump(obj, path, indent=2):
    with open(path, "w") as fh:
        fh.write(dumps(obj, indent=indent))


def load_json(path):
    with open(path) as fh:
        return json.load(fh)
