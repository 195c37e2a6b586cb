"""File formats.

Grid functions (and maximal fields) are stored as one JSON header line followed
by the cell values in lexicographic order, first coordinate fastest::

    {"format": "gridfunction", "n": 2, "delta": 0.25, "domain": {...}, "encoding": "csv", ...}
    0.0
    1.0
    ...

With ``"encoding": "binary"`` the payload after the header newline is raw
little-endian float64.  Box unions are plain JSON documents with
``"format": "boxunion"`` and a ``"boxes"`` list of ``{"lo": [...], "hi": [...]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .geometry import Box
from .grid import BoxUnionIndicator, Grid, GridFunction, TestFunction


def _header(f: GridFunction, encoding: str, extra: dict | None) -> dict:
    head = {
        "format": "gridfunction",
        "n": f.grid.n,
        "delta": f.grid.delta,
        "domain": {"lo": list(f.grid.domain.lo), "hi": list(f.grid.domain.hi)},
        "encoding": encoding,
        "count": f.grid.size,
    }
    if extra:
        head.update(extra)
    return head


def dumps_grid_function(f: GridFunction, encoding: str = "csv", extra: dict | None = None) -> bytes:
    if encoding not in ("csv", "binary"):
        raise ConfigurationError(f"unknown encoding {encoding!r}")
    head = json.dumps(_header(f, encoding, extra), sort_keys=True).encode() + b"\n"
    if encoding == "csv":
        return head + "".join(f"{v!r}\n" for v in f.values.tolist()).encode()
    return head + np.asarray(f.values, dtype="<f8").tobytes()


def write_grid_function(path, f: GridFunction, encoding: str = "csv", extra: dict | None = None) -> None:
    Path(path).write_bytes(dumps_grid_function(f, encoding, extra))


def loads_grid_function(data: bytes) -> GridFunction:
    head_raw, _, payload = data.partition(b"\n")
    head = json.loads(head_raw)
    if head.get("format") != "gridfunction":
        raise ConfigurationError("not a grid function file")
    grid = Grid(Box(head["domain"]["lo"], head["domain"]["hi"]), float(head["delta"]))
    if grid.n != head["n"]:
        raise ConfigurationError("header n disagrees with the domain")
    if head["encoding"] == "csv":
        values = np.array([float(v) for v in payload.decode().split()], dtype=float)
    elif head["encoding"] == "binary":
        values = np.frombuffer(payload, dtype="<f8").astype(float)
    else:
        raise ConfigurationError(f"unknown encoding {head['encoding']!r}")
    return GridFunction(grid, values)


def read_grid_function(path) -> GridFunction:
    return loads_grid_function(Path(path).read_bytes())


def box_union_to_dict(E: BoxUnionIndicator) -> dict:
    return {
        "format": "boxunion",
        "n": E.n,
        "boxes": [{"lo": list(b.lo), "hi": list(b.hi)} for b in E.boxes],
    }


def box_union_from_dict(doc: dict) -> BoxUnionIndicator:
    boxes = tuple(Box(b["lo"], b["hi"]) for b in doc.get("boxes", []))
    return BoxUnionIndicator(boxes, int(doc["n"]))


def write_box_union(path, E: BoxUnionIndicator) -> None:
    Path(path).write_text(json.dumps(box_union_to_dict(E), indent=1) + "\n")


def read_test_function(path) -> TestFunction:
    """Load either a box-union JSON document or a grid-function file."""
    data = Path(path).read_bytes()
    try:
        head = json.loads(data.partition(b"\n")[0])
    except ValueError:
        head = None
    if isinstance(head, dict) and head.get("format") == "gridfunction":
        return loads_grid_function(data)
    doc = json.loads(data)
    if doc.get("format") != "boxunion":
        raise ConfigurationError(f"{path}: unrecognized test function format")
    return box_union_from_dict(doc)
