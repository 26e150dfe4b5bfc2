"""JSON forms of relations, filtrations and operators.

* relation:   ``{"size": N, "pairs": [[r, c], ...]}``
* filtration: ``{"kind": "metric"|"group"|"filter"|"explicit"|..., "generator": <relation>,
  "max_level": K, "filter_base": [[...], ...]}``
* operator:   ``{"rows": N, "cols": M, "entries": [[y, x, re, im], ...]}`` sorted row-major

Floats are written with ``repr`` precision, so operators round-trip bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .filtration import CoarseFiltration, filtration_from_dict
from .operators import SparseOperator
from .relations import Relation

__all__ = [
    "relation_to_dict",
    "relation_from_dict",
    "filtration_to_dict",
    "filtration_from_dict",
    "operator_to_dict",
    "operator_from_dict",
    "dumps",
    "save_json",
    "load_json",
]


def relation_to_dict(e: Relation) -> dict:
    return e.to_dict()


def relation_from_dict(d: dict) -> Relation:
    return Relation.from_pairs(int(d["size"]), d["pairs"])


def filtration_to_dict(f: CoarseFiltration) -> dict:
    return f.to_dict()


def operator_to_dict(a: SparseOperator) -> dict:
    rows, cols = a.shape
    return {
        "rows": rows,
        "cols": cols,
        "entries": [[y, x, float(v.real), float(v.imag)] for y, x, v in a.triplets()],
    }


def operator_from_dict(d: dict) -> SparseOperator:
    rows, cols = int(d["rows"]), int(d["cols"])
    ent = d["entries"]
    if ent:
        arr = np.array(ent, dtype=float)
        ys, xs = arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64)
        vals = arr[:, 2] + 1j * arr[:, 3]
        if ys.min() < 0 or xs.min() < 0 or ys.max() >= rows or xs.max() >= cols:
            raise ValueError("operator entry out of range")
    else:
        ys = xs = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0, dtype=np.complex128)
    m = sp.csr_array((vals, (ys, xs)), shape=(rows, cols))
    return SparseOperator(m, cols, rows)


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_default) + "\n"


def save_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def load_json(path):
    return json.loads(Path(path).read_text())
