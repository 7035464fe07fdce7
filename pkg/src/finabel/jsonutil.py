"""Deterministic JSON emission helpers shared by reports and the CLI."""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np


def jsonable(obj):
    """Recursively convert report objects into sorted-key JSON material.

    Complex numbers become [re, im]; non-finite floats become their
    repr strings so artifacts stay strict JSON.
    """
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, complex):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return jsonable(float(obj))
    if isinstance(obj, np.complexfloating):
        return jsonable(complex(obj))
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = list(obj)
        if isinstance(obj, (set, frozenset)):
            items = sorted(items)
        return [jsonable(v) for v in items]
    if dataclasses.is_dataclass(obj):
        if hasattr(obj, "to_json_dict"):
            return jsonable(obj.to_json_dict())
        return jsonable(dataclasses.asdict(obj))
    if hasattr(obj, "to_json_dict"):
        return jsonable(obj.to_json_dict())
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dump_json(obj, path: str | Path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"
