"""Data-driven assembly of the reduced pencil from tangential samples.

Every entry of the reduced matrices is a divided difference of sample
pairings:

    E[i,j] = -(<p_j, Lv_i>_U - <Rv_j, q_i>_Y) / (rho_i - sigma_j)
    A[i,j] = -(rho_i <p_j, Lv_i>_U - sigma_j <Rv_j, q_i>_Y) / (rho_i - sigma_j)

with Rv_j = G(sigma_j)[p_j] and Lv_i = G(rho_i)^+[q_i]. For coincident
pairs (sigma_j = rho_i) the divided differences degenerate into the Hermite
scalar h = <dG/ds(sigma_j)[p_j], q_i>:

    E[i,j] = -h,    A[i,j] = -(<Rv_j, q_i>_Y + sigma_j h).

The input map rows are the left sample values, the output map columns the
right sample values, so the assembled model interpolates the data by
construction. No model evaluations happen here; the dataset is the only
input.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import ConditioningError
from .funcspace import inner_product
from .jsonio import complex_to_pair, fv_to_json
from .rom import ReducedModel
from .samples import TangentialDataset

COND_LIMIT = 1e12
COND_WARN = 1e8


def _pairings(dataset: TangentialDataset):
    """gq[i,j] = <G(sigma_j)[p_j], q_i>_Y and pg[i,j] = <p_j, G(rho_i)^+[q_i]>_U."""
    r = dataset.r
    gq = np.empty((r, r), dtype=np.complex128)
    pg = np.empty((r, r), dtype=np.complex128)
    for i, left in enumerate(dataset.lefts):
        for j, right in enumerate(dataset.rights):
            gq[i, j] = inner_product(right.value, left.q)
            pg[i, j] = inner_product(right.p, left.value)
    return gq, pg


def _matrices(dataset: TangentialDataset):
    sig = dataset.sigmas
    rho = dataset.rhos
    gq, pg = _pairings(dataset)
    hm = dataset.hermite_map()
    coincident = set(dataset.coincident_pairs())
    r = dataset.r
    E = np.empty((r, r), dtype=np.complex128)
    A = np.empty((r, r), dtype=np.complex128)
    for i in range(r):
        for j in range(r):
            if (i, j) in coincident:
                h = hm[(i, j)]
                E[i, j] = -h
                A[i, j] = -(gq[i, j] + sig[j] * h)
            else:
                d = rho[i] - sig[j]
                E[i, j] = -(pg[i, j] - gq[i, j]) / d
                A[i, j] = -(rho[i] * pg[i, j] - sig[j] * gq[i, j]) / d
    return E, A


def dataset_hash(dataset: TangentialDataset) -> str:
    """sha256 of the dataset's canonical JSON form."""
    obj = {
        "r": dataset.r,
        "coincidence_tol": dataset.coincidence_tol,
        "rights": [
            {"sigma": complex_to_pair(s.sigma), "p": fv_to_json(s.p), "value": fv_to_json(s.value)}
            for s in dataset.rights
        ],
        "lefts": [
            {"rho": complex_to_pair(s.rho), "q": fv_to_json(s.q), "value": fv_to_json(s.value)}
            for s in dataset.lefts
        ],
        "hermites": [
            {"i": h.i, "j": h.j, "value": complex_to_pair(h.value)} for h in dataset.hermites
        ],
    }
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def assemble(dataset: TangentialDataset, cond_limit=COND_LIMIT,
             cond_warn=COND_WARN) -> ReducedModel:
    """Build the interpolatory reduced model from a tangential dataset.

    Rejects assemblies whose E matrix condition estimate exceeds
    ``cond_limit`` (no silent regularization; pick different points or
    directions instead) and warns above ``cond_warn``. Provenance records
    the dataset hash and the full tangential data so a saved model can be
    re-validated against a model config alone.
    """
    dataset.validate()
    E, A = _matrices(dataset)
    cond = float(np.linalg.cond(E))
    if not np.isfinite(cond) or cond > cond_limit:
        raise ConditioningError(
            f"assembled E has condition estimate {cond:.3e} above limit {cond_limit:.1e}; "
            "the chosen points/directions do not yield a usable pencil",
            cond_estimate=cond,
        )
    if cond > cond_warn:
        warnings.warn(
            f"assembled E has condition estimate {cond:.3e}; results may lose "
            f"{np.log10(cond):.0f} digits",
            stacklevel=2,
        )
    provenance = {
        "kind": "loewner",
        "tool_version": __version__,
        "dataset_sha256": dataset_hash(dataset),
        "coincidence_tol": dataset.coincidence_tol,
        "cond_E": cond,
        "sigmas": [complex_to_pair(s) for s in dataset.sigmas],
        "rhos": [complex_to_pair(r) for r in dataset.rhos],
        "right_dirs": [fv_to_json(s.p) for s in dataset.rights],
        "left_dirs": [fv_to_json(s.q) for s in dataset.lefts],
    }
    b_rows = [s.value.copy() for s in dataset.lefts]
    c_cols = [s.value.copy() for s in dataset.rights]
    return ReducedModel(E, A, b_rows, c_cols, provenance)


@dataclass
class ConditionReport:
    """Diagnostics for a prospective assembly. Separations of coincident
    left/right pairs are intentional and excluded from min_cross_separation."""

    cond_E: float
    min_sigma_separation: float
    min_rho_separation: float
    min_cross_separation: float
    right_gram_det: float
    left_gram_det: float

    @property
    def acceptable(self) -> bool:
        return self.cond_E <= COND_LIMIT


def _min_separation(points):
    pts = np.asarray(points)
    if pts.size < 2:
        return np.inf
    gaps = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(gaps, np.inf)
    return float(np.min(gaps))


def _normalized_gram_det(dirs):
    g = np.empty((len(dirs), len(dirs)), dtype=np.complex128)
    for i, a in enumerate(dirs):
        for j, b in enumerate(dirs):
            g[i, j] = inner_product(a, b) / (a.norm() * b.norm())
    return float(abs(np.linalg.det(g)))


def condition_report(dataset: TangentialDataset) -> ConditionReport:
    """Assemble E and report its conditioning, point separations, and
    direction Gram determinants without building a model."""
    dataset.validate()
    E, _ = _matrices(dataset)
    sig = dataset.sigmas
    rho = dataset.rhos
    cross = np.abs(sig[None, :] - rho[:, None])
    cross = cross[cross >= dataset.coincidence_tol]
    return ConditionReport(
        cond_E=float(np.linalg.cond(E)),
        min_sigma_separation=_min_separation(sig),
        min_rho_separation=_min_separation(rho),
        min_cross_separation=float(np.min(cross)) if cross.size else np.inf,
        right_gram_det=_normalized_gram_det([s.p for s in dataset.rights]),
        left_gram_det=_normalized_gram_det([s.q for s in dataset.lefts]),
    )
