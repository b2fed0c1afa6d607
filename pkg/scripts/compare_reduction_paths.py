#!/usr/bin/env python3
"""Build the same interpolatory reduced model twice, once from transfer
function samples alone and once by explicit Petrov-Galerkin projection of the
modal truncation, and report how well the two agree."""

import argparse

import numpy as np

from opmor.funcspace import Patch, QuadratureGrid
from opmor.heat2d import FullModel, ModalTruncation, default_quad_order
from opmor.loewner import assemble
from opmor.projection import (
    build_bases,
    project_explicit,
    sylvester_residual_left,
    sylvester_residual_right,
)
from opmor.samples import collect, make_direction

SIGMAS = [1.0, 2.0, 5.0 + 1.0j, 5.0 - 1.0j]
RHOS = [1.5, 2.5, 6.0 + 1.0j, 6.0 - 1.0j]
RIGHT_DIRS = ["mode:1,1", "mode:1,2", "mode:2,1", "mode:2,1"]
LEFT_DIRS = ["mode:1,1", "mode:2,2", "mode:1,3", "mode:1,3"]


def rel_gap(got, want):
    return np.max(np.abs(got - want)) / np.max(np.abs(want))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-modes", type=int, default=12)
    args = ap.parse_args()

    order = default_quad_order(args.n_modes)
    model = FullModel(
        QuadratureGrid(Patch(0.1, 0.3, 0.1, 0.3), order),
        QuadratureGrid(Patch(0.6, 0.8, 0.6, 0.8), order),
        ModalTruncation(args.n_modes),
    )
    rom_data = assemble(collect(model, SIGMAS, RIGHT_DIRS, RHOS, LEFT_DIRS))
    V, W = build_bases(model, SIGMAS, RIGHT_DIRS, RHOS, LEFT_DIRS)
    rom_proj = project_explicit(model, V, W)

    print(f"model: {model.poles.size} modes, r = {rom_data.r}")
    print(f"E agreement:        {rel_gap(rom_data.E, rom_proj.E):.3e}")
    print(f"A agreement:        {rel_gap(rom_data.A, rom_proj.A):.3e}")
    b_data = np.array([b.values for b in rom_data.b_rows])
    b_proj = np.array([b.values for b in rom_proj.b_rows])
    c_data = np.array([c.values for c in rom_data.c_cols])
    c_proj = np.array([c.values for c in rom_proj.c_cols])
    print(f"B rows agreement:   {rel_gap(b_data, b_proj):.3e}")
    print(f"C columns agreement:{rel_gap(c_data, c_proj):.3e}")
    _, rel_r = sylvester_residual_right(model, V, SIGMAS, RIGHT_DIRS)
    _, rel_l = sylvester_residual_left(model, W, RHOS, LEFT_DIRS)
    print(f"Sylvester residuals: right {rel_r:.3e}, left {rel_l:.3e}")

    worst = 0.0
    for s, spec in zip(SIGMAS, RIGHT_DIRS):
        p = make_direction(spec, model.con_grid)
        want = model.apply_tf(s, p)
        worst = max(worst, (rom_data.eval_tf(s, p) - want).norm() / want.norm())
    print(f"worst interpolation residual at the sample points: {worst:.3e}")


if __name__ == "__main__":
    main()
