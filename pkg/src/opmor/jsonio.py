"""JSON helpers shared by dataset, model and report files.

Complex scalars are stored exclusively as two-element [re, im] arrays;
complex matrices as nested lists of such pairs. Function vectors carry their
own grid metadata (patch and per-axis order) so files are self-describing.
Python's float repr round-trips through JSON exactly, which makes save/load
bit-exact.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ParseError
from .funcspace import FunctionVector, Patch, QuadratureGrid


def complex_to_pair(z):
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(obj, where=""):
    if (
        not isinstance(obj, (list, tuple))
        or len(obj) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)
    ):
        raise ParseError(f"expected a [re, im] pair at {where or 'value'}, got {obj!r}")
    return complex(obj[0], obj[1])


def cvector_to_json(values):
    return [complex_to_pair(z) for z in np.asarray(values).ravel()]

def cvector_from_json(obj, where=""):
    if not isinstance(obj, list):
        raise ParseError(f"expected a list of [re, im] pairs at {where}")
    return np.array(
        [pair_to_complex(v, f"{where}[{k}]") for k, v in enumerate(obj)],
        dtype=np.complex128,
    )


def cmatrix_to_json(arr):
    return [cvector_to_json(row) for row in np.asarray(arr)]

def cmatrix_from_json(obj, where=""):
    if not isinstance(obj, list) or not obj:
        raise ParseError(f"expected a nonempty list of rows at {where}")
    rows = [cvector_from_json(row, f"{where}[{k}]") for k, row in enumerate(obj)]
    if len({r.size for r in rows}) != 1:
        raise ParseError(f"ragged matrix at {where}")
    return np.array(rows)


def patch_to_json(patch: Patch):
    return {"x": [patch.x_lo, patch.x_hi], "y": [patch.y_lo, patch.y_hi]}

def patch_from_json(obj, where="patch"):
    try:
        (x_lo, x_hi), (y_lo, y_hi) = obj["x"], obj["y"]
        return Patch(float(x_lo), float(x_hi), float(y_lo), float(y_hi))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad patch spec at {where}: {e}") from e


def fv_to_json(f: FunctionVector):
    return {
        "patch": patch_to_json(f.grid.patch),
        "quad_order": f.grid.order,
        "values": cvector_to_json(f.values),
    }

def fv_from_json(obj, where="", grid_cache=None):
    if not isinstance(obj, dict) or not {"patch", "quad_order", "values"} <= set(obj):
        raise ParseError(f"expected a function vector object at {where}")
    patch = patch_from_json(obj["patch"], f"{where}.patch")
    order = obj["quad_order"]
    if not isinstance(order, int) or order < 1:
        raise ParseError(f"bad quad_order at {where}: {order!r}")
    key = (patch, order)
    if grid_cache is not None and key in grid_cache:
        grid = grid_cache[key]
    else:
        grid = QuadratureGrid(patch, order)
        if grid_cache is not None:
            grid_cache[key] = grid
    values = cvector_from_json(obj["values"], f"{where}.values")
    if values.size != grid.size:
        raise ParseError(
            f"value count {values.size} does not match grid size {grid.size} at {where}"
        )
    return FunctionVector(grid, values)


def load_json(path):
    """Read a JSON file, turning syntax errors into ParseError with location."""
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    except OSError as e:
        raise ParseError(f"{path}: {e}") from e


def dump_json(obj, path):
    """Write deterministic JSON: sorted keys, fixed layout, trailing newline."""
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
