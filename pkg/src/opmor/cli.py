"""Command line interface: sample, reduce, validate, h2, irka, simulate.

Exit codes: 0 success, 1 a computed check failed (validation residual above
tolerance, non-convergence, inconsistent artifacts), 2 unusable input or
config. All outputs are deterministic for a fixed config file; JSON is
written with sorted keys and floats serialized by repr, CSV numbers with a
fixed 17-significant-digit format, so repeated runs are byte-identical.

Set MOR_LOG=DEBUG|INFO|WARNING|ERROR to control log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from . import rom as rom_mod
from . import samples
from .config import build_model, load_run_config, parse_point
from .errors import DatasetError, ParseError, ReductionError
from .funcspace import FunctionVector, inner_product
from .h2 import (
    FrequencyQuadrature,
    h2_error,
    h2_norm_report,
    hs_norm,
    optimality_residuals,
)
from .irka import IrkaConfig
from .irka import run as irka_run
from .jsonio import complex_to_pair, dump_json, fv_from_json
from .loewner import assemble

log = logging.getLogger("opmor")

IMAG_RESIDUE_RTOL = 1e-6


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _fmt_or_empty(x) -> str:
    return "" if x != x else _fmt(x)  # NaN-safe for history columns


def _report_base(cfg) -> dict:
    return {"tool_version": __version__, "config_sha256": cfg.sha256}


def _write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------- sample

def cmd_sample(args) -> int:
    cfg = load_run_config(args.config)
    model = build_model(cfg.model_block)
    block = cfg.task("sample")
    try:
        sigmas = [parse_point(s, f"sample.sigmas[{j}]")
                  for j, s in enumerate(block["sigmas"])]
        rhos = [parse_point(s, f"sample.rhos[{j}]")
                for j, s in enumerate(block["rhos"])]
        right_dirs = block["right_dirs"]
        left_dirs = block["left_dirs"]
    except KeyError as e:
        raise ParseError(f"sample block is missing {e}") from e
    dataset = samples.collect(
        model, sigmas, right_dirs, rhos, left_dirs,
        conjugate_close=bool(block.get("conjugate_close", False)),
    )
    samples.save(dataset, args.out)
    log.info("wrote %d+%d samples to %s", len(dataset.rights), len(dataset.lefts), args.out)
    print(f"sampled r={dataset.r} tangential dataset -> {args.out}")
    return 0


# ---------------------------------------------------------------- reduce

def cmd_reduce(args) -> int:
    cfg = load_run_config(args.config)
    block = cfg.task("reduce")
    dataset = samples.load(args.data)
    rom = assemble(
        dataset,
        cond_limit=float(block.get("cond_limit", 1e12)),
        cond_warn=float(block.get("cond_warn", 1e8)),
    )
    rom.provenance.update(_report_base(cfg))
    rom_mod.save(rom, args.out)
    print(f"assembled r={rom.r} reduced model (cond E = {rom.provenance['cond_E']:.3e}) "
          f"-> {args.out}")
    return 0


# ---------------------------------------------------------------- validate

def cmd_validate(args) -> int:
    cfg = load_run_config(args.config)
    model = build_model(cfg.model_block)
    rom = rom_mod.load(args.rom)
    tol = args.tol if args.tol is not None else float(cfg.task("validate").get("tol", 1e-8))
    prov = rom.provenance or {}
    needed = {"sigmas", "rhos", "right_dirs", "left_dirs"}
    if prov.get("kind") != "loewner" or not needed <= set(prov):
        raise ParseError(
            "reduced model provenance lacks tangential data; only data-driven "
            "models can be validated against their own interpolation points"
        )
    cache = {}
    sigmas = [parse_point(s, "provenance.sigmas") for s in prov["sigmas"]]
    rhos = [parse_point(s, "provenance.rhos") for s in prov["rhos"]]
    ps = [fv_from_json(o, f"provenance.right_dirs[{j}]", cache)
          for j, o in enumerate(prov["right_dirs"])]
    qs = [fv_from_json(o, f"provenance.left_dirs[{i}]", cache)
          for i, o in enumerate(prov["left_dirs"])]
    coincidence_tol = float(prov.get("coincidence_tol", 1e-10))

    checks = []
    for s, p in zip(sigmas, ps):
        want = model.apply_tf(s, p)
        res = (rom.eval_tf(s, p) - want).norm() / want.norm()
        checks.append({"kind": "right", "point": complex_to_pair(s), "residual": res})
    for t, q in zip(rhos, qs):
        want = model.apply_tf_adjoint(t, q)
        res = (rom.eval_tf_adjoint(t, q) - want).norm() / want.norm()
        checks.append({"kind": "left", "point": complex_to_pair(t), "residual": res})
    for t, q in zip(rhos, qs):
        for s, p in zip(sigmas, ps):
            if abs(s - t) < coincidence_tol:
                want = inner_product(model.apply_tf_derivative(s, p), q)
                got = inner_product(rom.eval_tf_derivative(s, p), q)
                checks.append({
                    "kind": "hermite", "point": complex_to_pair(s),
                    "residual": abs(got - want) / abs(want),
                })
    worst = max(c["residual"] for c in checks)
    passed = worst <= tol
    report = _report_base(cfg)
    report.update({"tol": tol, "checks": checks, "max_residual": worst, "pass": passed})
    if args.out:
        dump_json(report, args.out)
    for c in checks:
        print(f"{c['kind']:>8} @ {complex(*c['point'])}: residual {c['residual']:.3e}")
    print(f"validate: max residual {worst:.3e} against tol {tol:.1e} -> "
          f"{'PASS' if passed else 'FAIL'}")
    return 0 if passed else 1


# ---------------------------------------------------------------- h2

def cmd_h2(args) -> int:
    cfg = load_run_config(args.config)
    model = build_model(cfg.model_block)
    block = cfg.task("h2")
    quad = FrequencyQuadrature(int(block.get("nodes", 256)))
    norms = h2_norm_report(model, quad)
    report = _report_base(cfg)
    report.update({
        "norm_closed": norms.closed,
        "norm_quadrature": norms.quadrature,
        "h2_error": None,
        "residuals": [],
    })
    rom = rom_mod.load(args.rom) if args.rom else None
    if rom is not None:
        report["h2_error"] = h2_error(model, rom)
        opt = optimality_residuals(model, rom)
        report["residuals"] = [
            {
                "pole": complex_to_pair(pole),
                "eps_left": float(el), "eps_right": float(er), "eps_herm": float(eh),
            }
            for pole, el, er, eh
            in zip(opt.poles, opt.eps_left, opt.eps_right, opt.eps_herm)
        ]
    dump_json(report, args.out)
    if args.csv:
        header = "omega,hs_full" + (",hs_rom" if rom is not None else "")
        lines = [header]
        for w in quad.omegas:
            row = [_fmt(w), _fmt(hs_norm(model, 1j * w))]
            if rom is not None:
                row.append(_fmt(hs_norm(rom, 1j * w)))
            lines.append(",".join(row))
        _write_lines(args.csv, lines)
    print(f"h2 norm closed {norms.closed:.6e}, quadrature {norms.quadrature:.6e}"
          + (f", error^2 {report['h2_error']:.6e}" if rom is not None else ""))
    return 0


# ---------------------------------------------------------------- irka

def _seeded_specs(dirs, base_seed):
    out = []
    for k, d in enumerate(dirs):
        if isinstance(d, str) and d == "random":
            d = f"random:{base_seed + k}"
        out.append(d)
    return out


def cmd_irka(args) -> int:
    cfg = load_run_config(args.config)
    model_block = dict(cfg.model_block)
    if args.n_modes is not None:
        model_block["n_modes"] = args.n_modes
        # a configured quad_order sized for the old mode count would
        # under-resolve the products; fall back to the scaling default
        model_block.pop("quad_order", None)
    model = build_model(model_block)
    block = cfg.task("irka")
    order = args.order if args.order is not None else block.get("order")
    if order is None:
        raise ParseError("irka needs --order or an 'order' entry in the irka block")
    if args.init is not None:
        init_points = [complex(tok) for tok in args.init.split(",")]
    elif "init_points" in block:
        init_points = [parse_point(s, "irka.init_points") for s in block["init_points"]]
    else:
        init_points = None
    seed = args.seed if args.seed is not None else int(block.get("seed", 0))
    right_dirs = block.get("init_right_dirs")
    left_dirs = block.get("init_left_dirs")
    if right_dirs is not None:
        right_dirs = _seeded_specs(right_dirs, seed)
    if left_dirs is not None:
        left_dirs = _seeded_specs(left_dirs, seed + 1000)
    irka_config = IrkaConfig(
        r=int(order),
        init_points=init_points,
        init_right_dirs=right_dirs,
        init_left_dirs=left_dirs,
        max_iter=args.max_iter if args.max_iter is not None else int(block.get("max_iter", 50)),
        point_tol=args.tol if args.tol is not None else float(block.get("point_tol", 1e-8)),
        stability_reflection=bool(block.get("stability_reflection", True)),
    )
    reduced, conv = irka_run(model, irka_config)

    def _clean(xs):
        return [None if x != x else float(x) for x in xs]

    report = _report_base(cfg)
    report.update({
        "converged": conv.converged,
        "iterations": conv.iterations,
        "best_iteration": conv.best_iteration,
        "point_history": [[complex_to_pair(s) for s in pts] for pts in conv.point_history],
        "movement_history": _clean(conv.movement_history),
        "residual_history": _clean(conv.residual_history),
        "h2_error_history": _clean(conv.h2_error_history),
        "final": None,
    })
    if reduced is not None:
        opt = optimality_residuals(model, reduced)
        report["final"] = {
            "h2_error": h2_error(model, reduced),
            "max_residual": opt.max_residual,
            "poles": [complex_to_pair(s) for s in opt.poles],
        }
        if args.rom_out:
            reduced.provenance.update(_report_base(cfg))
            rom_mod.save(reduced, args.rom_out)
    dump_json(report, args.out)
    if args.csv:
        lines = ["iteration,movement,residual,h2_error"]
        for k in range(conv.iterations):
            lines.append(",".join([
                str(k + 1),
                _fmt(conv.movement_history[k]),
                _fmt_or_empty(conv.residual_history[k]),
                _fmt_or_empty(conv.h2_error_history[k]),
            ]))
        _write_lines(args.csv, lines)
    status = "converged" if conv.converged else "did not converge"
    print(f"irka r={irka_config.r}: {status} after {conv.iterations} iterations")
    return 0 if conv.converged else 1


# ---------------------------------------------------------------- simulate

def _read_signal_csv(path, grid):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as e:
        raise ParseError(f"cannot read input signal {path}: {e}") from e
    if len(lines) < 3:
        raise ParseError(f"{path}: need a header and at least two time rows")
    rows = []
    for ln in lines[1:]:
        try:
            rows.append([float(tok) for tok in ln.split(",")])
        except ValueError as e:
            raise ParseError(f"{path}: non-numeric entry ({e})") from e
    data = np.array(rows)
    if data.shape[1] != grid.size + 1:
        raise ParseError(
            f"{path}: expected time plus {grid.size} node columns, got {data.shape[1]}"
        )
    t = data[:, 0]
    dt = t[1] - t[0]
    if dt <= 0 or np.max(np.abs(np.diff(t) - dt)) > 1e-9 * dt:
        raise ParseError(f"{path}: time column must be uniformly spaced")
    u = [FunctionVector(grid, row) for row in data[:, 1:]]
    return t, float(dt), u


def _node_names(grid):
    return [f"x{x:.6f}y{y:.6f}" for x, y in grid.nodes]


def _write_output_csv(path, t, outputs, grid):
    vals = np.array([y.values for y in outputs])
    scale = np.max(np.abs(vals)) or 1.0
    worst = np.max(np.abs(vals.imag))
    if worst > IMAG_RESIDUE_RTOL * scale:
        raise ReductionError(
            f"simulated output has imaginary residue {worst:.3e} against scale "
            f"{scale:.3e}; the model is not conjugate-symmetric, refusing to "
            "write a real-valued CSV"
        )
    lines = ["time," + ",".join(_node_names(grid))]
    for tk, row in zip(t, vals.real):
        lines.append(",".join([_fmt(tk)] + [_fmt(v) for v in row]))
    _write_lines(path, lines)


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config)
    model = build_model(cfg.model_block)
    rom = rom_mod.load(args.rom)
    t, dt, u = _read_signal_csv(args.input, model.con_grid)
    horizon = args.T if args.T is not None else float(t[-1])
    n_steps = int(round(horizon / dt))
    y_rom = rom_mod.simulate(rom, u, horizon, dt)
    _write_output_csv(args.out, t[: n_steps + 1], y_rom, rom.y_grid)
    if args.full_out:
        y_full = model.simulate(u, horizon, dt)
        _write_output_csv(args.full_out, t[: n_steps + 1], y_full, model.obs_grid)
    print(f"simulated {n_steps} steps of dt={dt:g} -> {args.out}")
    return 0


# ---------------------------------------------------------------- driver

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opmor",
        description="Model reduction workbench for the heated-plate benchmark.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="run config JSON")
        p.add_argument("--threads", type=int, default=1,
                       help="parallelism cap (1 = fully reproducible; the "
                            "current implementation is sequential either way)")

    p = sub.add_parser("sample", help="evaluate tangential data on the full model")
    common(p)
    p.add_argument("--out", required=True, help="dataset JSON to write")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("reduce", help="assemble a reduced model from tangential data")
    common(p)
    p.add_argument("--data", required=True, help="dataset JSON from 'sample'")
    p.add_argument("--out", required=True, help="reduced model JSON to write")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("validate", help="check interpolation conditions of a reduced model")
    common(p)
    p.add_argument("--rom", required=True, help="reduced model JSON")
    p.add_argument("--tol", type=float, default=None, help="relative residual tolerance")
    p.add_argument("--out", default=None, help="optional report JSON")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("h2", help="H2 norms, error and optimality residuals")
    common(p)
    p.add_argument("--rom", default=None, help="reduced model JSON (optional)")
    p.add_argument("--out", required=True, help="report JSON to write")
    p.add_argument("--csv", default=None, help="optional per-frequency HS-norm CSV")
    p.set_defaults(func=cmd_h2)

    p = sub.add_parser("irka", help="fixed-point iteration toward H2 optimality")
    common(p)
    p.add_argument("--order", type=int, default=None, help="reduced order r")
    p.add_argument("--n-modes", type=int, default=None, dest="n_modes",
                   help="override model n_modes from the config")
    p.add_argument("--init", default=None,
                   help="comma-separated initial points, e.g. '1,10' or '1+2j,1-2j'")
    p.add_argument("--tol", type=float, default=None, help="point movement tolerance")
    p.add_argument("--max-iter", type=int, default=None, dest="max_iter")
    p.add_argument("--seed", type=int, default=None,
                   help="seed applied to 'random' direction specs")
    p.add_argument("--out", required=True, help="convergence report JSON")
    p.add_argument("--rom-out", default=None, dest="rom_out", help="reduced model JSON")
    p.add_argument("--csv", default=None, help="optional per-iteration history CSV")
    p.set_defaults(func=cmd_irka)

    p = sub.add_parser("simulate", help="time-domain response of a reduced model")
    common(p)
    p.add_argument("--rom", required=True, help="reduced model JSON")
    p.add_argument("--input", required=True,
                   help="input CSV: time column plus one column per control node")
    p.add_argument("--out", required=True, help="reduced output CSV")
    p.add_argument("--full-out", default=None, dest="full_out",
                   help="optional full-model output CSV for comparison")
    p.add_argument("--T", type=float, default=None, help="horizon (default: last input time)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("MOR_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, DatasetError, ValueError, FileNotFoundError) as e:
        # bad arguments, files or config; keep these distinct from the
        # computational failures below
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ReductionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
