"""Run configuration: the JSON surface shared by the command line tools.

A config file always carries a "model" block

    {"model": {"con_patch": {"x": [0.1, 0.3], "y": [0.1, 0.3]},
               "obs_patch": {"x": [0.6, 0.8], "y": [0.6, 0.8]},
               "n_modes": 12, "quad_order": 28}}

plus optional task blocks (sample, reduce, validate, h2, irka, simulate)
holding points, directions, tolerances and seeds. Reports embed the sha256
of the raw config bytes so a result can always be traced to the exact file
that produced it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import json

from .errors import ParseError
from .funcspace import QuadratureGrid
from .heat2d import FullModel, ModalTruncation, default_quad_order
from .jsonio import pair_to_complex, patch_from_json


def parse_point(obj, where=""):
    """Interpolation points appear as plain reals or [re, im] pairs."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    return pair_to_complex(obj, where)


def build_model(block, where="model") -> FullModel:
    """Heat benchmark model from its config block."""
    if not isinstance(block, dict):
        raise ParseError(f"expected an object at {where}")
    try:
        con_patch = patch_from_json(block["con_patch"], f"{where}.con_patch")
        obs_patch = patch_from_json(block["obs_patch"], f"{where}.obs_patch")
        n_modes = block["n_modes"]
    except KeyError as e:
        raise ParseError(f"{where} is missing required key {e}") from e
    if not isinstance(n_modes, int) or n_modes < 1:
        raise ParseError(f"{where}.n_modes must be a positive integer, got {n_modes!r}")
    order = block.get("quad_order", default_quad_order(n_modes))
    if not isinstance(order, int) or order < 1:
        raise ParseError(f"{where}.quad_order must be a positive integer, got {order!r}")
    return FullModel(
        QuadratureGrid(con_patch, order),
        QuadratureGrid(obs_patch, order),
        ModalTruncation(n_modes),
    )


@dataclass
class RunConfig:
    raw: dict
    sha256: str
    path: str

    @property
    def model_block(self) -> dict:
        return self.raw["model"]

    def task(self, name: str) -> dict:
        block = self.raw.get(name, {})
        if not isinstance(block, dict):
            raise ParseError(f"config block {name!r} must be an object")
        return block


def load_run_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        raise ParseError(f"cannot read config {path}: {e}") from e
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict) or "model" not in raw:
        raise ParseError(f"config {path} must be an object with a 'model' block")
    return RunConfig(raw=raw, sha256=hashlib.sha256(data).hexdigest(), path=str(path))
