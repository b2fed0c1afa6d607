"""Reduced-order models: degree-r rational transfer functions between the
same function spaces as the full model.

A ReducedModel is the tuple (E, A, b_rows, c_cols): the input map sends p to
the vector of pairings <p, b_i>_U, the pencil solve applies (sE - A)^{-1},
and the output map combines the c_j. The pole-residue decomposition turns
the pencil into r scalar poles with tangential directions, which drives
stability checks, H2 formulas and exact time stepping.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConditioningError,
    GridMismatchError,
    ParseError,
    SemiSimplicityError,
    SingularSolveError,
)
from .funcspace import FunctionVector
from .jsonio import (
    cmatrix_from_json,
    cmatrix_to_json,
    dump_json,
    fv_from_json,
    fv_to_json,
    load_json,
)
from .models import PoleFactorModel

# relative eigenvalue separation below which a pencil is treated as defective
POLE_SEPARATION_RTOL = 1e-8

# s*E - A counts as singular when its smallest singular value drops below
# this fraction of the pencil scale |s|*||E|| + ||A||
SOLVE_RTOL = 1e-13


class ReducedModel:
    """Petrov-Galerkin style reduced system with function-valued ports.

    ``b_rows`` are the Riesz representers of the rows of the reduced input
    map (so B_r[p]_i = <p, b_rows[i]>_U); ``c_cols`` are the images of the
    reduced basis under the output map. ``provenance`` is a JSON-plain dict
    recorded into the file format unchanged.
    """

    def __init__(self, E, A, b_rows, c_cols, provenance=None):
        E = np.array(E, dtype=np.complex128)
        A = np.array(A, dtype=np.complex128)
        if E.ndim != 2 or E.shape[0] != E.shape[1] or E.shape != A.shape:
            raise ValueError(f"E and A must be square matrices of equal size, got {E.shape} and {A.shape}")
        r = E.shape[0]
        if len(b_rows) != r or len(c_cols) != r:
            raise ValueError(f"need {r} input representers and {r} output columns")
        u_grid = b_rows[0].grid
        y_grid = c_cols[0].grid
        if any(b.grid != u_grid for b in b_rows):
            raise GridMismatchError("input representers live on different grids")
        if any(c.grid != y_grid for c in c_cols):
            raise GridMismatchError("output columns live on different grids")
        e_cond = float(np.linalg.cond(E))
        if not np.isfinite(e_cond):
            raise ConditioningError("E is singular", cond_estimate=e_cond)
        self.E = E
        self.A = A
        self.r = r
        self.b_rows = list(b_rows)
        self.c_cols = list(c_cols)
        self.u_grid = u_grid
        self.y_grid = y_grid
        self.e_cond = e_cond
        self.provenance = dict(provenance or {})
        self._b_vals = np.array([b.values for b in b_rows])
        self._c_vals = np.array([c.values for c in c_cols])
        # weight-folded pairing rows for the input and output maps
        self._b_pair = np.conj(self._b_vals) * u_grid.weights
        self._c_pair = np.conj(self._c_vals) * y_grid.weights
        self._e_norm = float(np.linalg.norm(E, 2))
        self._a_norm = float(np.linalg.norm(A, 2))
        for arr in (self.E, self.A, self._b_vals, self._c_vals, self._b_pair, self._c_pair):
            arr.setflags(write=False)

    def _pencil(self, s):
        s = complex(s)
        M = s * self.E - self.A
        smin = np.linalg.svd(M, compute_uv=False)[-1]
        scale = abs(s) * self._e_norm + self._a_norm
        if smin <= SOLVE_RTOL * max(scale, np.finfo(float).tiny):
            raise SingularSolveError(
                f"pencil s*E - A is singular at s={s} "
                f"(smallest singular value {smin:.2e} vs scale {scale:.2e})"
            )
        return M

    def _input(self, p):
        if p.grid != self.u_grid:
            raise GridMismatchError(
                f"direction lives on {p.grid!r}, reduced input space uses {self.u_grid!r}"
            )
        return self._b_pair @ p.values

    def eval_tf(self, s, p: FunctionVector) -> FunctionVector:
        """G_r(s)[p] = C_r (sE - A)^{-1} B_r[p]."""
        x = np.linalg.solve(self._pencil(s), self._input(p))
        return FunctionVector(self.y_grid, self._c_vals.T @ x)

    def eval_tf_adjoint(self, s, q: FunctionVector) -> FunctionVector:
        """G_r(s)^+[q], satisfying <eval_tf(s,p), q> = <p, eval_tf_adjoint(s,q)>."""
        if q.grid != self.y_grid:
            raise GridMismatchError(
                f"direction lives on {q.grid!r}, reduced output space uses {self.y_grid!r}"
            )
        M = self._pencil(s)
        w = np.linalg.solve(M.conj().T, self._c_pair @ q.values)
        return FunctionVector(self.u_grid, self._b_vals.T @ w)

    def eval_tf_derivative(self, s, p: FunctionVector) -> FunctionVector:
        """d/ds G_r(s)[p] = -C_r (sE-A)^{-1} E (sE-A)^{-1} B_r[p]."""
        M = self._pencil(s)
        x = np.linalg.solve(M, self._input(p))
        return FunctionVector(self.y_grid, -self._c_vals.T @ np.linalg.solve(M, self.E @ x))

    def __repr__(self):
        return f"ReducedModel(r={self.r}, cond_E={self.e_cond:.2e})"


@dataclass
class PoleResidue:
    """Diagonalized form G_r(s) = sum_i <., b_dirs[i]> c_dirs[i] / (s - poles[i])."""

    poles: np.ndarray
    b_dirs: list
    c_dirs: list

    @property
    def r(self) -> int:
        return self.poles.size

    def to_factor_model(self, pole_tol=0.0) -> PoleFactorModel:
        return PoleFactorModel(
            self.b_dirs[0].grid,
            self.c_dirs[0].grid,
            self.poles,
            np.array([b.values for b in self.b_dirs]),
            np.array([c.values for c in self.c_dirs]),
            pole_tol=pole_tol,
        )


def pole_residue(rom: ReducedModel) -> PoleResidue:
    """Diagonalize the pencil (A, E) into poles and tangential residues.

    Solves against E to reduce to a standard eigenproblem (E's conditioning
    is policed at assembly), then normalizes left/right eigenvectors so
    y_i^* E x_j = delta_ij. Raises SemiSimplicityError when eigenvalues
    cluster tighter than the separation tolerance.
    """
    vals, X = np.linalg.eig(np.linalg.solve(rom.E, rom.A))
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    X = X[:, order]
    if rom.r > 1:
        gaps = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(gaps, np.inf)
        scale = max(np.max(np.abs(vals)), np.finfo(float).tiny)
        if np.min(gaps) < POLE_SEPARATION_RTOL * scale:
            raise SemiSimplicityError(
                f"pencil eigenvalues cluster below separation tolerance "
                f"(min gap {np.min(gaps):.2e}, scale {scale:.2e})",
                poles=vals,
            )
    # rows of (E X)^{-1} are left eigenvectors with y_i^* E x_j = delta_ij
    YH = np.linalg.inv(rom.E @ X)
    b_vals = np.conj(YH) @ rom._b_vals
    c_vals = (rom._c_vals.T @ X).T
    b_dirs = [FunctionVector(rom.u_grid, v) for v in b_vals]
    c_dirs = [FunctionVector(rom.y_grid, v) for v in c_vals]
    return PoleResidue(vals, b_dirs, c_dirs)


def is_stable(rom: ReducedModel):
    """(stable, margin): stable iff all poles lie in the open left half-plane;
    margin is -max Re(pole)."""
    pr = pole_residue(rom)
    worst = float(np.max(np.real(pr.poles)))
    return worst < 0, -worst


def simulate(rom: ReducedModel, u, T, dt):
    """Exact-exponential time stepping of the diagonalized reduced system."""
    pr = pole_residue(rom)
    if np.max(np.real(pr.poles)) >= 0:
        warnings.warn(
            "reduced model is unstable; simulation proceeds but may diverge",
            stacklevel=2,
        )
    return pr.to_factor_model().simulate(u, T, dt)


def save(rom: ReducedModel, path):
    obj = {
        "r": rom.r,
        "E": cmatrix_to_json(rom.E),
        "A": cmatrix_to_json(rom.A),
        "b_rows": [fv_to_json(b) for b in rom.b_rows],
        "c_cols": [fv_to_json(c) for c in rom.c_cols],
        "provenance": rom.provenance,
    }
    dump_json(obj, path)


def load(path) -> ReducedModel:
    obj = load_json(path)
    cache = {}
    try:
        E = cmatrix_from_json(obj["E"], "E")
        A = cmatrix_from_json(obj["A"], "A")
        b_rows = [fv_from_json(b, f"b_rows[{i}]", cache) for i, b in enumerate(obj["b_rows"])]
        c_cols = [fv_from_json(c, f"c_cols[{j}]", cache) for j, c in enumerate(obj["c_cols"])]
        declared_r = int(obj["r"])
        provenance = obj.get("provenance", {})
    except (KeyError, TypeError) as e:
        raise ParseError(f"{path}: missing or malformed field: {e}") from e
    if E.shape != (declared_r, declared_r):
        raise ParseError(
            f"{path}: declared order r={declared_r} but E has shape {E.shape}"
        )
    return ReducedModel(E, A, b_rows, c_cols, provenance)
