import numpy as np
import pytest

from opmor.errors import ConditioningError, PoleProximityError
from opmor.funcspace import Patch, QuadratureGrid, constant
from opmor.h2 import h2_error, optimality_residuals
from opmor.heat2d import FullModel, ModalTruncation
from opmor.irka import ConvergenceReport, IrkaConfig, run, step
from opmor.models import RankOneModel


def unit_const(grid):
    f = constant(grid)
    return f * (1.0 / f.norm())


@pytest.fixture(scope="module")
def grids():
    return (
        QuadratureGrid(Patch(0.1, 0.3, 0.1, 0.3), 8),
        QuadratureGrid(Patch(0.6, 0.8, 0.6, 0.8), 8),
    )


@pytest.fixture(scope="module")
def toy(grids):
    return RankOneModel(unit_const(grids[0]), unit_const(grids[1]), -1.0)


@pytest.fixture(scope="module")
def heat():
    # acceptance-scale benchmark: kept module-scoped because the IRKA runs
    # below reuse it several times
    return FullModel(
        QuadratureGrid(Patch(0.1, 0.3, 0.1, 0.3), 28),
        QuadratureGrid(Patch(0.6, 0.8, 0.6, 0.8), 28),
        ModalTruncation(12),
    )


@pytest.fixture(scope="module")
def heat_run(heat):
    return run(heat, IrkaConfig(r=2, init_points=[1.0, 10.0]))


class TestIrkaConfig:
    def test_rejects_bad_order(self):
        with pytest.raises(ValueError, match="order"):
            IrkaConfig(r=0).validate()

    def test_rejects_bad_tolerance(self):
        with pytest.raises(ValueError, match="point_tol"):
            IrkaConfig(r=1, point_tol=0.0).validate()

    def test_rejects_left_half_plane_init(self):
        with pytest.raises(ValueError, match="right half-plane"):
            IrkaConfig(r=1, init_points=[-1.0]).validate()

    def test_rejects_wrong_init_length(self):
        with pytest.raises(ValueError, match="length"):
            IrkaConfig(r=2, init_points=[1.0]).validate()


class TestStep:
    def test_exact_recovery_is_a_fixed_point(self, toy):
        # one Hermite sample of a rank-1 function recovers it exactly, so
        # the mirror of the recovered pole is the point we started from
        rom, next_points, next_rights, next_lefts = step(
            toy, [1.0], [toy.p], [toy.q]
        )
        assert abs(next_points[0] - 1.0) < 1e-9
        assert rom.r == 1
        assert next_rights[0].norm() == pytest.approx(1.0, rel=1e-12)

    def test_unstable_pole_is_reflected(self, grids):
        bad = RankOneModel(unit_const(grids[0]), unit_const(grids[1]), 0.5)
        _, pts, _, _ = step(bad, [2.0], [bad.p], [bad.q])
        assert pts[0] == pytest.approx(0.5, rel=1e-10)
        _, pts, _, _ = step(bad, [2.0], [bad.p], [bad.q], stability_reflection=False)
        assert pts[0] == pytest.approx(-0.5, rel=1e-10)

    def test_point_on_spectrum_rejected(self, toy):
        with pytest.raises(PoleProximityError):
            step(toy, [-1.0], [toy.p], [toy.q])


class TestRun:
    def test_toy_recovers_exactly(self, toy):
        config = IrkaConfig(r=1, init_points=[3.0], init_right_dirs=[toy.p],
                            init_left_dirs=[toy.q])
        rom, report = run(toy, config)
        assert report.converged
        assert report.iterations <= 10
        assert h2_error(toy, rom) < 1e-10

    def test_heat_r2_converges(self, heat, heat_run):
        rom, report = heat_run
        assert report.converged
        assert report.iterations <= 50
        assert report.movement_history[-1] < 1e-8
        final_residual = optimality_residuals(heat, rom).max_residual
        assert final_residual < 1e-6
        # the documented calibration of the stopping rule
        assert final_residual < 100 * IrkaConfig(r=2).point_tol

    def test_point_sets_stay_conjugate_closed(self, heat_run):
        _, report = heat_run
        for iterate in report.point_history:
            pts = np.asarray(iterate)
            for s in pts:
                gap = np.min(np.abs(pts - np.conj(s)))
                assert gap < 1e-10 * max(1.0, abs(s))

    def test_histories_align(self, heat_run):
        _, report = heat_run
        n = report.iterations
        assert len(report.point_history) == n
        assert len(report.movement_history) == n
        assert len(report.residual_history) == n
        assert len(report.h2_error_history) == n
        assert 1 <= report.best_iteration <= n

    def test_error_history_is_recorded_not_asserted(self, heat_run):
        # no monotonicity claim; the history is for inspection
        _, report = heat_run
        finite = np.asarray(report.h2_error_history)
        finite = finite[np.isfinite(finite)]
        assert finite.size > 0
        assert np.all(finite >= 0)

    def test_zero_iterations(self, toy):
        config = IrkaConfig(r=1, init_points=[1.0], init_right_dirs=[toy.p],
                            init_left_dirs=[toy.q], max_iter=0)
        rom, report = run(toy, config)
        assert rom is None
        assert report == ConvergenceReport(converged=False, iterations=0)

    def test_non_convergence_returns_best_iterate(self, heat):
        config = IrkaConfig(r=2, init_points=[1.0, 10.0], max_iter=3)
        rom, report = run(heat, config)
        assert not report.converged
        assert report.iterations == 3
        assert rom is not None
        best = int(np.argmin(report.movement_history)) + 1
        assert report.best_iteration == best

    def test_deterministic(self, heat):
        config = IrkaConfig(r=2, init_points=[1.0, 10.0], max_iter=6)
        _, rep1 = run(heat, config)
        _, rep2 = run(heat, config)
        assert rep1.movement_history == rep2.movement_history
        assert rep1.point_history[-1] == rep2.point_history[-1]

    def test_default_init_converges(self, heat):
        rom, report = run(heat, IrkaConfig(r=2))
        assert report.converged
        assert optimality_residuals(heat, rom).max_residual < 1e-6

    def test_failure_carries_iteration_context(self, toy):
        # r = 2 tangential data on a rank-1 transfer function makes the
        # reduced pencil singular at assembly
        config = IrkaConfig(r=2, init_points=[1.0, 2.0],
                            init_right_dirs=[toy.p, toy.p],
                            init_left_dirs=[toy.q, toy.q])
        with pytest.raises(ConditioningError, match="iteration 1"):
            run(toy, config)
