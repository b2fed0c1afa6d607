"""Fixed-point iteration on interpolation data toward the tangential H2
optimality conditions.

Each sweep interpolates the full model bilinearly (Hermite data at
coincident left/right points), reads off the reduced poles and residue
directions, and re-targets the mirror points -conj(lambda_i) with the
residue directions as the next tangential data. Stationarity of that map is
exactly the first-order optimality system, so the matched movement of the
point set doubles as a convergence certificate; empirically a movement
below point_tol keeps the optimality residuals under about 100x point_tol,
which is what the default pairing (1e-8 -> 1e-6) is calibrated for.

No convergence theory is claimed: non-convergent runs return the best
(least-moving) iterate flagged converged=False rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ReductionError
from .funcspace import FunctionVector
from .h2 import h2_error, optimality_residuals
from .loewner import assemble
from .rom import ReducedModel, pole_residue
from .samples import collect, make_direction

CONJ_SNAP_RTOL = 1e-8
REAL_SNAP_RTOL = 1e-12


@dataclass
class IrkaConfig:
    r: int
    init_points: list | None = None        # None: log-spaced over the decade above the slowest pole
    init_right_dirs: list | None = None    # None: lowest retained input factors, normalized
    init_left_dirs: list | None = None
    max_iter: int = 50
    point_tol: float = 1e-8
    stability_reflection: bool = True

    def validate(self) -> None:
        if self.r < 1:
            raise ValueError(f"order must be at least 1, got {self.r}")
        if self.point_tol <= 0:
            raise ValueError("point_tol must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if self.init_points is not None:
            if len(self.init_points) != self.r:
                raise ValueError("init_points length must equal the order")
            if any(complex(s).real <= 0 for s in self.init_points):
                raise ValueError("init points must lie in the open right half-plane")


@dataclass
class ConvergenceReport:
    converged: bool
    iterations: int
    point_history: list = field(default_factory=list)
    movement_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    h2_error_history: list = field(default_factory=list)
    best_iteration: int = 0  # 1-based index of the returned iterate


def _fix_phase(f: FunctionVector) -> np.ndarray:
    """Values of f scaled to unit function-space norm with the
    largest-magnitude entry rotated to the positive real axis; kills the
    eigenvector phase ambiguity for determinism."""
    v = f.values / f.norm()
    pivot = v[np.argmax(np.abs(v))]
    return v * (np.conj(pivot) / abs(pivot))


def _snap_conjugate(points, right_vals, left_vals):
    """Make near-conjugate point/direction pairs exactly conjugate (and
    near-real points exactly real) so closure survives round-off."""
    pts = [complex(s) for s in points]
    scale = max(1.0, max(abs(s) for s in pts))
    done = set()
    for i, s in enumerate(pts):
        if i in done:
            continue
        if abs(s.imag) <= REAL_SNAP_RTOL * scale:
            pts[i] = complex(s.real, 0.0)
            continue
        for j in range(i + 1, len(pts)):
            if j in done:
                continue
            if abs(pts[j] - np.conj(s)) <= CONJ_SNAP_RTOL * scale:
                pts[j] = complex(np.conj(s))
                right_vals[j] = np.conj(right_vals[i])
                left_vals[j] = np.conj(left_vals[i])
                done.add(j)
                break
    return pts


def step(full, points, right_dirs, left_dirs, stability_reflection: bool = True):
    """One interpolation sweep: Hermite data at the given points, reduced
    model assembly, and mirror-point/residue-direction extraction.

    Returns (rom, next_points, next_right_dirs, next_left_dirs). Unstable
    reduced poles are reflected into the left half-plane before mirroring
    when stability_reflection is set, which re-targets the point itself.
    """
    dataset = collect(full, points, right_dirs, points, left_dirs)
    rom = assemble(dataset)
    pr = pole_residue(rom)
    poles = pr.poles.copy()
    if stability_reflection:
        unstable = poles.real >= 0
        poles[unstable] = -np.conj(poles[unstable])
    mirrors = -np.conj(poles)
    right_vals = [_fix_phase(b) for b in pr.b_dirs]
    left_vals = [_fix_phase(c) for c in pr.c_dirs]
    next_points = _snap_conjugate(mirrors, right_vals, left_vals)
    next_right = [FunctionVector(rom.u_grid, v) for v in right_vals]
    next_left = [FunctionVector(rom.y_grid, v) for v in left_vals]
    return rom, next_points, next_right, next_left


def _matched_movement(old, new) -> float:
    cost = np.abs(np.asarray(old, dtype=complex)[:, None]
                  - np.asarray(new, dtype=complex)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def _default_init(full, config: IrkaConfig):
    if config.r > full.poles.size:
        raise ValueError(
            f"default init needs r <= {full.poles.size} retained modes, got r = {config.r}"
        )
    slowest = np.min(np.abs(full.poles))
    points = [complex(s) for s in np.logspace(0.0, np.log10(10.0 * slowest), config.r)]
    rights = [
        FunctionVector(full.con_grid,
                       _fix_phase(FunctionVector(full.con_grid, full.input_factors[i])))
        for i in range(config.r)
    ]
    lefts = [
        FunctionVector(full.obs_grid,
                       _fix_phase(FunctionVector(full.obs_grid, full.output_factors[i])))
        for i in range(config.r)
    ]
    return points, rights, lefts


def run(full, config: IrkaConfig):
    """Iterate step() until the matched point movement drops below
    config.point_tol or the iteration budget runs out.

    Returns (rom, ConvergenceReport); on non-convergence the rom is the
    iterate with the smallest movement and converged is False (max_iter = 0
    returns rom None). Deterministic for a fixed config.
    """
    config.validate()
    needs_default = (config.init_points is None or config.init_right_dirs is None
                     or config.init_left_dirs is None)
    defaults = _default_init(full, config) if needs_default else (None, None, None)
    points = [complex(s) for s in (config.init_points if config.init_points is not None
                                   else defaults[0])]
    rights = (
        [make_direction(d, full.con_grid) for d in config.init_right_dirs]
        if config.init_right_dirs is not None else defaults[1]
    )
    lefts = (
        [make_direction(d, full.obs_grid) for d in config.init_left_dirs]
        if config.init_left_dirs is not None else defaults[2]
    )
    if len(rights) != config.r or len(lefts) != config.r:
        raise ValueError("direction lists must match the order")

    report = ConvergenceReport(converged=False, iterations=0)
    best: ReducedModel | None = None
    best_movement = np.inf
    for it in range(1, config.max_iter + 1):
        try:
            rom, next_points, next_rights, next_lefts = step(
                full, points, rights, lefts,
                stability_reflection=config.stability_reflection,
            )
        except ReductionError as e:
            e.args = (f"iteration {it}: {e.args[0]}",) + e.args[1:]
            raise
        movement = _matched_movement(points, next_points)
        report.iterations = it
        report.point_history.append(list(next_points))
        report.movement_history.append(movement)
        try:
            report.residual_history.append(optimality_residuals(full, rom).max_residual)
            report.h2_error_history.append(h2_error(full, rom))
        except ReductionError:
            # unstable intermediate iterate: the certificate is undefined
            report.residual_history.append(float("nan"))
            report.h2_error_history.append(float("nan"))
        if movement < best_movement:
            best, best_movement, report.best_iteration = rom, movement, it
        points, rights, lefts = next_points, next_rights, next_lefts
        if movement < config.point_tol:
            report.converged = True
            report.best_iteration = it
            return rom, report
    return best, report
