import json

import numpy as np
import pytest

from opmor.errors import DatasetError, GridMismatchError, ParseError, PoleProximityError
from opmor.funcspace import FunctionVector, Patch, QuadratureGrid, constant, inner_product
from opmor.heat2d import FullModel, ModalTruncation, eigenvalue
from opmor.samples import (
    HermiteSample,
    TangentialDataset,
    collect,
    conjugate_closure,
    is_conjugate_closed,
    load,
    make_direction,
    save,
)


@pytest.fixture(scope="module")
def model():
    return FullModel(
        QuadratureGrid(Patch(0.1, 0.3, 0.1, 0.3), 16),
        QuadratureGrid(Patch(0.6, 0.8, 0.6, 0.8), 16),
        ModalTruncation(4),
    )


class TestDirections:
    def test_mode_spec(self, model):
        d = make_direction("mode:2,3", model.con_grid)
        x, y = model.con_grid.nodes[:, 0], model.con_grid.nodes[:, 1]
        np.testing.assert_allclose(
            d.values, 2 * np.sin(2 * np.pi * x) * np.sin(3 * np.pi * y)
        )

    def test_const_spec_normalized(self, model):
        d = make_direction("const", model.con_grid)
        assert d.norm() == pytest.approx(1.0, rel=1e-14)
        assert np.ptp(d.values.real) == pytest.approx(0.0, abs=1e-15)

    def test_random_spec_deterministic(self, model):
        a = make_direction("random:42", model.con_grid)
        b = make_direction("random:42", model.con_grid)
        c = make_direction("random:43", model.con_grid)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)
        assert a.norm() == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("bad", ["mode:1", "random:x", "gauss", "mode:a,b", 7])
    def test_bad_specs(self, model, bad):
        with pytest.raises(ValueError):
            make_direction(bad, model.con_grid)


class TestCollect:
    def test_distinct_points_no_hermite(self, model):
        ds = collect(model, [1.0, 2.0], ["const", "mode:1,1"], [3.0, 4.0],
                     ["const", "mode:1,1"])
        assert ds.r == 2
        assert ds.hermites == []
        # values are exactly the model evaluations
        want = model.apply_tf(1.0, ds.rights[0].p)
        np.testing.assert_array_equal(ds.rights[0].value.values, want.values)
        want = model.apply_tf_adjoint(4.0, ds.lefts[1].q)
        np.testing.assert_array_equal(ds.lefts[1].value.values, want.values)

    def test_coincident_pair_gets_hermite(self, model):
        ds = collect(model, [1.0, 5.0], ["const", "const"], [1.0, 7.0],
                     ["const", "const"])
        assert len(ds.hermites) == 1
        h = ds.hermites[0]
        assert (h.i, h.j) == (0, 0)
        want = inner_product(
            model.apply_tf_derivative(1.0, ds.rights[0].p), ds.lefts[0].q
        )
        assert h.value == want

    def test_zero_direction_rejected(self, model):
        z = constant(model.con_grid, 0.0)
        with pytest.raises(ValueError, match="direction 1 is zero"):
            collect(model, [1.0, 2.0], ["const", z], [3.0, 4.0], ["const", "const"])

    def test_point_on_spectrum_rejected(self, model):
        with pytest.raises(PoleProximityError):
            collect(model, [eigenvalue(1, 1)], ["const"], [3.0], ["const"])

    def test_near_coincidence_warns(self, model):
        with pytest.warns(UserWarning, match="nearly coincident"):
            ds = collect(model, [1.0 + 5e-8], ["const"], [1.0], ["const"])
        assert ds.hermites == []

    def test_length_mismatch(self, model):
        with pytest.raises(ValueError):
            collect(model, [1.0, 2.0], ["const"], [3.0], ["const"])


class TestConjugateClosure:
    def test_closure_appends_conjugates(self, model):
        pts = [1.0, 2.0 + 1.0j]
        dirs = [make_direction("random:1", model.con_grid) for _ in pts]
        out_p, out_d = conjugate_closure(pts, dirs)
        assert out_p == [1.0, 2.0 + 1.0j, 2.0 - 1.0j]
        np.testing.assert_array_equal(out_d[2].values, np.conj(out_d[1].values))

    def test_closed_set_unchanged(self, model):
        pts = [2.0 + 1.0j, 2.0 - 1.0j]
        d = make_direction("random:2", model.con_grid)
        out_p, out_d = conjugate_closure(pts, [d, d.conj()])
        assert out_p == pts

    def test_collect_with_closure_is_structurally_closed(self, model):
        ds = collect(
            model, [1.0, 3.0 + 2.0j], ["const", "random:5"], [2.0, 3.0 + 2.0j],
            ["const", "random:6"], conjugate_close=True,
        )
        assert ds.r == 3
        assert is_conjugate_closed(ds)

    def test_open_set_detected(self, model):
        ds = collect(model, [3.0 + 2.0j], ["random:5"], [3.0 + 2.0j], ["random:6"])
        assert not is_conjugate_closed(ds)
        real = collect(model, [1.0], ["const"], [2.0], ["const"])
        assert is_conjugate_closed(real)


class TestRoundTrip:
    def test_bit_exact(self, model, tmp_path):
        ds = collect(
            model,
            [1.0, 2.0 + 0.5j, 4.0],
            ["const", "random:3", "mode:2,1"],
            [1.0, 3.0, 5.0 - 1.0j],
            ["mode:1,1", "const", "random:9"],
        )
        path = tmp_path / "ds.json"
        save(ds, path)
        back = load(path)
        assert back.r == ds.r
        assert back.coincidence_tol == ds.coincidence_tol
        for a, b in zip(ds.rights, back.rights):
            assert a.sigma == b.sigma
            assert np.array_equal(a.p.values, b.p.values)
            assert np.array_equal(a.value.values, b.value.values)
            assert a.value.grid == b.value.grid
        for a, b in zip(ds.lefts, back.lefts):
            assert a.rho == b.rho
            assert np.array_equal(a.q.values, b.q.values)
            assert np.array_equal(a.value.values, b.value.values)
        assert [(h.i, h.j, h.value) for h in back.hermites] == [
            (h.i, h.j, h.value) for h in ds.hermites
        ]

    def test_save_is_deterministic(self, model, tmp_path):
        ds = collect(model, [1.0], ["const"], [2.0], ["const"])
        save(ds, tmp_path / "a.json")
        save(ds, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"r": 1, "rights": [')
        with pytest.raises(ParseError, match="line"):
            load(path)

    def test_missing_left_sample(self, model, tmp_path):
        ds = collect(model, [1.0, 2.0], ["const", "const"], [3.0, 4.0],
                     ["const", "const"])
        path = tmp_path / "ds.json"
        save(ds, path)
        obj = json.loads(path.read_text())
        del obj["lefts"][1]
        path.write_text(json.dumps(obj))
        with pytest.raises(DatasetError, match="left sample 1 is missing"):
            load(path)

    def test_declared_order_mismatch(self, model, tmp_path):
        ds = collect(model, [1.0], ["const"], [2.0], ["const"])
        path = tmp_path / "ds.json"
        save(ds, path)
        obj = json.loads(path.read_text())
        obj["r"] = 3
        path.write_text(json.dumps(obj))
        with pytest.raises(DatasetError, match="declared order"):
            load(path)

    def test_missing_hermite_for_coincident_pair(self, model, tmp_path):
        ds = collect(model, [1.0], ["const"], [1.0], ["const"])
        path = tmp_path / "ds.json"
        save(ds, path)
        obj = json.loads(path.read_text())
        obj["hermites"] = []
        path.write_text(json.dumps(obj))
        with pytest.raises(DatasetError, match="no hermite"):
            load(path)

    def test_spurious_hermite_rejected(self, model):
        ds = collect(model, [1.0], ["const"], [2.0], ["const"])
        ds.hermites.append(HermiteSample(0, 0, 1.0 + 0j))
        with pytest.raises(DatasetError, match="does not match any coincident pair"):
            ds.validate()

    def test_different_quad_order_loads_but_mismatches_on_use(self, model, tmp_path):
        # a dataset from a coarser grid loads fine; combining it with the
        # current model's vectors fails loudly at first contact
        coarse = FullModel(
            QuadratureGrid(Patch(0.1, 0.3, 0.1, 0.3), 12),
            QuadratureGrid(Patch(0.6, 0.8, 0.6, 0.8), 12),
            ModalTruncation(4),
        )
        ds = collect(coarse, [1.0], ["const"], [2.0], ["const"])
        path = tmp_path / "ds.json"
        save(ds, path)
        back = load(path)
        assert back.rights[0].p.grid.order == 12
        with pytest.raises(GridMismatchError):
            model.apply_tf(1.0, back.rights[0].p)
        with pytest.raises(GridMismatchError):
            inner_product(back.rights[0].p, constant(model.con_grid))
