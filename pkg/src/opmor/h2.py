"""Hardy-space (H2) norms, inner products, error functionals and the
tangential optimality residuals.

All quantities reduce to Gram matrices of the rank-1 factors. Writing a
transfer function as G(s) = sum_k coeff_k(s) <., u_k> y_k, the squared
Hilbert-Schmidt norm at a point s and the squared H2 norm are

    hs(s)^2   = sum_{k,l} coeff_k(s) conj(coeff_l(s)) <u_l,u_k> <y_k,y_l>,
    ||G||^2   = sum_{k,l} <u_l,u_k> <y_k,y_l> / (-(lam_k + conj lam_l)),

the latter by closing the frequency integral of each (k,l) term in the left
half-plane. The same contractions cover reduced models with the coefficient
matrix (sE - A)^{-1} in place of the diagonal resolvent, so no
diagonalization is needed for point evaluations.

The closed double series is the default for norms (deterministic, fast); the
tangent-substitution frequency quadrature is kept as the independent
cross-check and for profile output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ReductionError, StabilityError
from .funcspace import FunctionVector, inner_product
from .models import PoleFactorModel
from .rom import ReducedModel, is_stable, pole_residue

DEFAULT_NODES = 256
MAX_NODES = 4096
QUAD_STABLE_RTOL = 1e-8
NEGATIVE_CLAMP = 1e-12


class FrequencyQuadrature:
    """Gauss-Legendre rule in theta with omega = tan(theta), mapping
    (-pi/2, pi/2) onto the real frequency axis.

    The substitution absorbs the 1/omega^2 tail of stable integrands, so a
    few hundred nodes resolve them to near machine precision.
    """

    def __init__(self, n_nodes: int = DEFAULT_NODES):
        if n_nodes < 64:
            raise ValueError(f"need at least 64 nodes, got {n_nodes}")
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        self.omegas = np.tan(x * (np.pi / 2))
        self.weights = w * (np.pi / 2) * (1.0 + self.omegas ** 2)
        for arr in (self.omegas, self.weights):
            arr.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.omegas.size

    def integrate(self, values):
        """Integral over the real line of a sampled integrand."""
        return np.asarray(values) @ self.weights


def _factor_grams(model: PoleFactorModel):
    """(GU, GY) with GU[k,l] = <u_l, u_k>_U and GY[k,l] = <y_k, y_l>_Y,
    cached on the model (the factors are immutable)."""
    cached = getattr(model, "_h2_grams", None)
    if cached is None:
        wu = model.con_grid.weights
        wy = model.obs_grid.weights
        U = model.input_factors
        Y = model.output_factors
        cached = ((np.conj(U) * wu) @ U.T, (Y * wy) @ np.conj(Y).T)
        model._h2_grams = cached
    return cached


def _rom_grams(rom: ReducedModel):
    """(GB, GC) with GB[i,j] = <b_j, b_i>_U and GC[i,j] = <c_i, c_j>_Y."""
    cached = getattr(rom, "_h2_grams", None)
    if cached is None:
        wu = rom.u_grid.weights
        wy = rom.y_grid.weights
        B = rom._b_vals
        C = rom._c_vals
        cached = ((np.conj(B) * wu) @ B.T, (C * wy) @ np.conj(C).T)
        rom._h2_grams = cached
    return cached


def _hs_sq_factor(model, s):
    GU, GY = _factor_grams(model)
    alpha = 1.0 / (s - model.poles)
    return float(np.real(alpha @ ((GU * GY) @ np.conj(alpha))))


def _hs_sq_rom(rom, s):
    GB, GC = _rom_grams(rom)
    K = np.linalg.inv(rom._pencil(s))
    return float(np.real(np.sum((K @ GB @ K.conj().T) * GC)))


def hs_norm(system, s) -> float:
    """Hilbert-Schmidt norm of the transfer operator at a point s off the
    spectrum (full models) or off the reduced poles (reduced models)."""
    s = complex(s)
    if isinstance(system, ReducedModel):
        return np.sqrt(_hs_sq_rom(system, s))
    system._check_point(s)
    return np.sqrt(_hs_sq_factor(system, s))


def _require_stable(system) -> None:
    if isinstance(system, ReducedModel):
        stable, margin = is_stable(system)
        if not stable:
            raise StabilityError(
                f"reduced model has a pole with Re >= 0 (margin {margin:.3e}); "
                "the frequency integral diverges"
            )
    elif np.max(np.real(system.poles)) >= 0:
        raise StabilityError("model has a pole in the closed right half-plane")


def _h2_sq_closed(system) -> float:
    if isinstance(system, ReducedModel):
        system = pole_residue(system).to_factor_model()
    GU, GY = _factor_grams(system)
    lam = system.poles
    denom = -(lam[:, None] + np.conj(lam[None, :]))
    return float(np.real(np.sum(GU * GY / denom)))


def _h2_sq_quadrature(system, quad: FrequencyQuadrature) -> float:
    if isinstance(system, ReducedModel):
        vals = [_hs_sq_rom(system, 1j * w) for w in quad.omegas]
    else:
        vals = [_hs_sq_factor(system, 1j * w) for w in quad.omegas]
    return float(quad.integrate(vals)) / (2.0 * np.pi)


def _converged_quadrature(fn):
    """Evaluate fn(quad) with node doubling until the value stabilizes to
    QUAD_STABLE_RTOL (or the node budget runs out; the pole scales here keep
    convergence spectral, so that is a corner case, not an error)."""
    n = DEFAULT_NODES
    value = fn(FrequencyQuadrature(n))
    while 2 * n <= MAX_NODES:
        n *= 2
        refined = fn(FrequencyQuadrature(n))
        if abs(refined - value) <= QUAD_STABLE_RTOL * max(abs(refined), abs(value)):
            return refined
        value = refined
    return value


def h2_norm(system) -> float:
    """H2 norm via the closed double series over pole pairs."""
    _require_stable(system)
    return np.sqrt(_h2_sq_closed(system))


@dataclass
class H2NormReport:
    closed: float
    quadrature: float

    @property
    def rel_gap(self) -> float:
        return abs(self.closed - self.quadrature) / max(self.closed, np.finfo(float).tiny)


def h2_norm_report(system, quad: FrequencyQuadrature | None = None) -> H2NormReport:
    """Both H2 norm computations (closed series and frequency quadrature)
    with their agreement, for cross-checking and reporting.

    Without an explicit rule the quadrature doubles its nodes until stable.
    """
    _require_stable(system)
    if quad is None:
        qsq = _converged_quadrature(lambda q: _h2_sq_quadrature(system, q))
    else:
        qsq = _h2_sq_quadrature(system, quad)
    return H2NormReport(
        closed=np.sqrt(_h2_sq_closed(system)),
        quadrature=np.sqrt(qsq),
    )


def h2_inner_rank1(system, lam, p: FunctionVector, q: FunctionVector):
    """H2 inner product of the rank-1 function <., p> q / (s - lam) against
    the system's transfer function, evaluated as <q, G(-conj lam)[p]>_Y.

    One transfer evaluation replaces the frequency integral; lam must lie in
    the open left half-plane for the integral to exist.
    """
    lam = complex(lam)
    if lam.real >= 0:
        raise ValueError(f"pole must satisfy Re < 0, got {lam}")
    _require_stable(system)
    mirror = -np.conj(lam)
    if isinstance(system, ReducedModel):
        value = system.eval_tf(mirror, p)
    else:
        value = system.apply_tf(mirror, p)
    return complex(inner_product(q, value))


def h2_error(full, rom: ReducedModel) -> float:
    """Squared H2 distance ||G - G_r||^2 expanded over the reduced
    pole-residue form:

        ||G||^2 - 2 Re sum_i <c_i, G(-conj lam_i)[b_i]> + ||G_r||^2.

    Tiny negative round-off is clamped to zero; a negative value beyond
    round-off scale means the inputs are inconsistent and raises.
    """
    _require_stable(full)
    pr = pole_residue(rom)
    if np.max(np.real(pr.poles)) >= 0:
        raise StabilityError("reduced model must be stable for the H2 error")
    gsq = _h2_sq_closed(full)
    grsq = _h2_sq_closed(pr.to_factor_model())
    cross = 0.0 + 0.0j
    for lam, b, c in zip(pr.poles, pr.b_dirs, pr.c_dirs):
        cross += inner_product(c, full.apply_tf(-np.conj(lam), b))
    err = gsq - 2.0 * cross.real + grsq
    if err < 0:
        scale = max(gsq, grsq, 1.0)
        if err < -NEGATIVE_CLAMP * scale:
            raise ReductionError(
                f"squared error came out at {err:.3e} (scale {scale:.3e}); "
                "full and reduced models are inconsistent"
            )
        err = 0.0
    return float(err)


def h2_error_quadrature(full, rom: ReducedModel,
                        quad: FrequencyQuadrature | None = None) -> float:
    """Squared H2 distance by direct frequency quadrature of the pointwise
    difference; the independent cross-check for h2_error.

    The cross term contracts the full-model factors against the reduced
    input/output families through the pencil inverse at each node, so the
    difference is never formed as a dense operator. Without an explicit rule
    the quadrature doubles its nodes until stable.
    """
    _require_stable(full)
    _require_stable(rom)
    GUb = (full.input_factors * full.con_grid.weights) @ np.conj(rom._b_vals).T
    GYc = (np.conj(full.output_factors) * full.obs_grid.weights) @ rom._c_vals.T
    lam = full.poles

    def integral(rule):
        total = 0.0
        for w, wt in zip(rule.omegas, rule.weights):
            s = 1j * w
            K = np.linalg.inv(rom._pencil(s))
            alpha = 1.0 / (s - lam)
            cross = np.conj(alpha) @ np.sum((GYc @ K) * GUb, axis=1)
            total += wt * (_hs_sq_factor(full, s) + _hs_sq_rom(rom, s) - 2.0 * cross.real)
        return total / (2.0 * np.pi)

    value = integral(quad) if quad is not None else _converged_quadrature(integral)
    return max(float(value), 0.0)


@dataclass
class OptimalityReport:
    """Relative residuals of the tangential optimality conditions at the
    mirror points -conj(lam_i), one triple per reduced pole."""

    poles: np.ndarray
    eps_left: np.ndarray
    eps_right: np.ndarray
    eps_herm: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(max(self.eps_left.max(), self.eps_right.max(), self.eps_herm.max()))


def optimality_residuals(full, rom: ReducedModel) -> OptimalityReport:
    """How far the reduced model is from stationarity of the squared H2
    error: at each mirror point, compare transfer values along b_i, adjoint
    values along c_i, and the bilinear derivative, each normalized by the
    full-model magnitude."""
    _require_stable(full)
    pr = pole_residue(rom)
    if np.max(np.real(pr.poles)) >= 0:
        raise StabilityError("optimality conditions require a stable reduced model")
    eps_left = np.zeros(pr.r)
    eps_right = np.zeros(pr.r)
    eps_herm = np.zeros(pr.r)
    for i, (lam, b, c) in enumerate(zip(pr.poles, pr.b_dirs, pr.c_dirs)):
        mirror = -np.conj(lam)
        want = full.apply_tf(mirror, b)
        eps_left[i] = (rom.eval_tf(mirror, b) - want).norm() / want.norm()
        want = full.apply_tf_adjoint(mirror, c)
        eps_right[i] = (rom.eval_tf_adjoint(mirror, c) - want).norm() / want.norm()
        want_h = inner_product(full.apply_tf_derivative(mirror, b), c)
        got_h = inner_product(rom.eval_tf_derivative(mirror, b), c)
        eps_herm[i] = abs(got_h - want_h) / abs(want_h)
    return OptimalityReport(pr.poles, eps_left, eps_right, eps_herm)
