"""Explicit Petrov-Galerkin construction in modal coordinates.

This is the ground-truth path for verifying the data-driven assembly: the
trial basis vectors are shifted-resolvent images of the input directions,

    v_j = (sigma_j - A)^{-1} B[p_j],   coefficients <1_con p_j, phi_k> / (sigma_j - lam_k),

and the test functionals are adjoint-resolvent images of the output
directions. W is stored row-wise with pairing-ready (conjugated Riesz)
coefficients

    W[i, k] = <phi_k|obs, q_i> / (rho_i - lam_k),

so that every dual pairing becomes a plain matrix product: E_r = W V,
A_r = W (lam * V). The same series also reproduces the input/output maps the
data-driven path reads off from samples, which makes the two routes
comparable entry by entry.

Everything here runs at the model's own truncation, so agreement with the
sampled path is limited by rounding, not by series truncation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .errors import ConditioningError
from .funcspace import FunctionVector
from .heat2d import FullModel
from .jsonio import complex_to_pair
from .rom import ReducedModel
from .samples import make_direction

RANK_RTOL = 1e-13


@dataclass
class ModalBasisMatrix:
    """Modal-coordinate basis: columns of V (modes x r) or rows of W (r x modes).

    ``points`` and ``directions`` record where the basis came from; they are
    None for synthetic (e.g. random test) bases.
    """

    kind: str  # "V" or "W"
    coeffs: np.ndarray
    points: Optional[np.ndarray] = None
    directions: Optional[list] = None

    @property
    def r(self) -> int:
        return self.coeffs.shape[1] if self.kind == "V" else self.coeffs.shape[0]

    def check_rank(self):
        """Raise with Gram diagnostics when columns/rows are numerically
        dependent."""
        mat = self.coeffs if self.kind == "V" else self.coeffs.T
        if mat.shape[1] == 0:
            return
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv[-1] <= RANK_RTOL * sv[0]:
            norms = np.linalg.norm(mat, axis=0)
            gram = (mat.conj().T @ mat) / np.outer(norms, norms)
            raise ConditioningError(
                f"{self.kind} basis is rank deficient: singular values "
                f"{sv[0]:.3e} .. {sv[-1]:.3e}, normalized Gram determinant "
                f"{abs(np.linalg.det(gram)):.3e}"
            )


def build_bases(model: FullModel, sigmas, ps, rhos, qs):
    """Modal trial/test bases for the given tangential data.

    Directions may be FunctionVectors or config spec strings. Points must be
    off the retained spectrum; duplicate (point, direction) pairs produce a
    rank-deficiency error.
    """
    if len(sigmas) != len(ps) or len(rhos) != len(qs):
        raise ValueError("point and direction lists must have equal length")
    ps = [make_direction(p, model.con_grid) for p in ps]
    qs = [make_direction(q, model.obs_grid) for q in qs]
    lam = model.eigenvalues
    v_cols = []
    for s, p in zip(sigmas, ps):
        model._check_point(s)
        if p.norm() == 0:
            raise ValueError("right direction is zero")
        v_cols.append((model.b_coeffs @ p.values) / (complex(s) - lam))
    w_rows = []
    obs_w = model.obs_grid.weights
    for t, q in zip(rhos, qs):
        model._check_point(t)
        if q.norm() == 0:
            raise ValueError("left direction is zero")
        cq = (model.c_modes * obs_w) @ np.conj(q.values)
        w_rows.append(cq / (complex(t) - lam))
    V = ModalBasisMatrix("V", np.array(v_cols).T, np.asarray(sigmas, dtype=complex), ps)
    W = ModalBasisMatrix("W", np.array(w_rows), np.asarray(rhos, dtype=complex), qs)
    V.check_rank()
    W.check_rank()
    return V, W


def project_explicit(model: FullModel, V: ModalBasisMatrix, W: ModalBasisMatrix,
                     cond_limit=1e12) -> ReducedModel:
    """Petrov-Galerkin reduction E = W V, A = W (lam V), with the input map
    rows and output map columns realized on the model grids.

    The resulting input representers are exactly the adjoint-resolvent
    samples the data-driven path uses, and the output columns the transfer
    samples, whenever V and W came from build_bases.
    """
    V.check_rank()
    W.check_rank()
    lam = model.eigenvalues
    E = W.coeffs @ V.coeffs
    A = W.coeffs @ (lam[:, None] * V.coeffs)
    cond = float(np.linalg.cond(E))
    if not np.isfinite(cond) or cond > cond_limit:
        raise ConditioningError(
            f"projected E has condition estimate {cond:.3e} above limit {cond_limit:.1e}",
            cond_estimate=cond,
        )
    b_vals = np.conj(W.coeffs) @ model.input_factors
    c_vals = V.coeffs.T @ model.c_modes
    provenance = {
        "kind": "projection",
        "tool_version": __version__,
        "cond_E": cond,
        "sigmas": None if V.points is None else [complex_to_pair(s) for s in V.points],
        "rhos": None if W.points is None else [complex_to_pair(t) for t in W.points],
    }
    return ReducedModel(
        E,
        A,
        [FunctionVector(model.con_grid, v) for v in b_vals],
        [FunctionVector(model.obs_grid, v) for v in c_vals],
        provenance,
    )


def _input_columns(model: FullModel, ps):
    if len(ps) == 0:
        return np.zeros((model.poles.size, 0), dtype=np.complex128)
    return np.array([model.b_coeffs @ p.values for p in ps]).T


def sylvester_residual_right(model: FullModel, V: ModalBasisMatrix, sigmas, ps):
    """Frobenius residual of V diag(sigma) - A V = [B p_1 ... B p_r] in modal
    coordinates; returns (absolute, relative)."""
    ps = [make_direction(p, model.con_grid) for p in ps]
    B = _input_columns(model, ps)
    if B.size == 0:
        return 0.0, 0.0
    lam = model.eigenvalues
    R = V.coeffs @ np.diag(np.asarray(sigmas, dtype=complex)) - lam[:, None] * V.coeffs - B
    absres = float(np.linalg.norm(R))
    return absres, absres / float(np.linalg.norm(B))


def sylvester_residual_left(model: FullModel, W: ModalBasisMatrix, rhos, qs):
    """Frobenius residual of diag(rho) W - W A = [C* q_1; ...; C* q_r] in the
    same pairing coordinates as W; returns (absolute, relative)."""
    qs = [make_direction(q, model.obs_grid) for q in qs]
    if len(qs) == 0:
        return 0.0, 0.0
    obs_w = model.obs_grid.weights
    C = np.array([(model.c_modes * obs_w) @ np.conj(q.values) for q in qs])
    lam = model.eigenvalues
    R = np.diag(np.asarray(rhos, dtype=complex)) @ W.coeffs - W.coeffs * lam[None, :] - C
    absres = float(np.linalg.norm(R))
    return absres, absres / float(np.linalg.norm(C))


@dataclass
class ProjectorReport:
    idempotency_max: float
    range_max: float
    kernel_max: float


def projector_check(model: FullModel, rom: ReducedModel, V: ModalBasisMatrix,
                    W: ModalBasisMatrix, s, trials: int = 20, seed: int = 0) -> ProjectorReport:
    """Numerical test of the skew projector P(s) = V (sE-A)^{-1} W (s - A).

    Applies P twice to random modal vectors and reports the worst relative
    idempotency defect, the worst deviation of P v from v over the columns
    of V (range property), and the worst norm of P on random vectors first
    projected into its kernel {x : W (s - A) x = 0} (complement
    annihilation).
    """
    s = model._check_point(s)
    M = rom._pencil(s)
    lam = model.eigenvalues

    def apply_p(x):
        return V.coeffs @ np.linalg.solve(M, W.coeffs @ ((s - lam) * x))

    mw = W.coeffs * (s - lam)
    mw_pinv = np.linalg.pinv(mw)
    rng = np.random.default_rng(seed)
    idem = 0.0
    kern = 0.0
    for _ in range(trials):
        x = rng.standard_normal(lam.size) + 1j * rng.standard_normal(lam.size)
        px = apply_p(x)
        idem = max(idem, np.linalg.norm(apply_p(px) - px) / np.linalg.norm(px))
        xk = x - mw_pinv @ (mw @ x)
        kern = max(kern, np.linalg.norm(apply_p(xk)) / np.linalg.norm(xk))
    rng_max = 0.0
    for j in range(V.coeffs.shape[1]):
        v = V.coeffs[:, j]
        rng_max = max(rng_max, np.linalg.norm(apply_p(v) - v) / np.linalg.norm(v))
    return ProjectorReport(idempotency_max=float(idem), range_max=float(rng_max),
                           kernel_max=float(kern))
