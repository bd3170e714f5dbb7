"""Command-line front end.

Subcommands: check (envelope admissibility report), ratio (one curve,
one metric), flow (curve shortening trajectory), minimize (multi-start
ratio search), ricci (radial log-diffusion run).  All artifacts are
plain CSV/JSON with fixed key order and 17-significant-digit floats,
so identical configurations reproduce byte-identical files; the only
volatile values live under the manifest's "timing" key.

Exit codes: 0 success, 2 configuration problems (bad flags, unreadable
files, malformed specs), 3 domain errors from the numerics (reported
with the error class name on stderr).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .curves import ClosedCurve, isoperimetric_ratio
from .errors import IsoflowError
from .flow import FlowOptions, FlowStatus, flow_step, initial_state
from .hypotheses import (admissibility_threshold, check_conditions,
                         cusp_admissibility_constants, default_grid)
from .metric import (CuspProfile, RoundSphere, build_metric, cusp_envelope,
                     flat_table)
from .minimizer import StartSpec, minimize
from .ricci import cusp_seeded_sphere, solve_radial, track_ratio

log = logging.getLogger(__name__)

_TRAJECTORY_HEADER = "step,tau,L,A_in,A_out,I,k_int,k2_int,gb_residual"


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_metric(spec: str):
    """Shorthand name, inline JSON, or a path to a JSON metric file."""
    if spec == "sphere":
        return RoundSphere(1.0)
    if spec == "cusp":
        return CuspProfile()
    if spec == "flat":
        return flat_table()
    if spec.lstrip().startswith("{"):
        return build_metric(json.loads(spec))
    with open(spec) as fh:
        return build_metric(json.load(fh))


def _manifest(args: argparse.Namespace, extra: dict, t0: float) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    import scipy
    import shapely
    return {
        "command": args.command,
        "config": config,
        "versions": {
            "isoflow": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
            "scipy": scipy.__version__,
            "shapely": shapely.__version__,
        },
        "results": extra,
        "timing": {"wall_s": time.monotonic() - t0,
                   "finished_unix": time.time()},
    }


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


# ---------------------------------------------------------------------------
# subcommands

def _cmd_check(args) -> dict:
    consts = cusp_admissibility_constants(args.c1, args.c2)
    env = cusp_envelope(args.c1, args.c2, consts.r0)
    grid = default_grid(consts.r0, span=args.grid_span, n=args.grid_n)
    total_area = None
    if args.metric is not None:
        total_area = _load_metric(args.metric).total_area
    report = check_conditions(env, consts.c0, consts.b1, consts.b2,
                              consts.delta, grid, total_area=total_area)
    out = _outdir(args)
    _write_json(os.path.join(out, "report.json"), report.to_dict())
    if args.margins_csv:
        _write_margins_csv(os.path.join(out, "margins.csv"), env, consts, grid)
    print(f"c0 = {consts.c0:.12g}  all_pass = {report.all_pass}")
    return {"all_pass": report.all_pass, "c0": consts.c0}


def _write_margins_csv(path, env, consts, grid) -> None:
    # one row per radius: re-evaluate each margin individually
    rows = []
    for r in grid:
        rep = check_conditions(env, consts.c0, consts.b1, consts.b2,
                               consts.delta, [r])
        rows.append([r] + [rep.per_condition[k].worst_margin
                           for k in ("cond2", "cond3", "cond4", "cond5")])
    with open(path, "w", newline="") as fh:
        fh.write("r,cond2,cond3,cond4,cond5\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _cmd_ratio(args) -> dict:
    metric = _load_metric(args.metric)
    curve = ClosedCurve.from_csv(args.curve)
    m = isoperimetric_ratio(curve, metric)
    out = _outdir(args)
    payload = {"L": m.length_g, "A_in": m.area_in, "A_out": m.area_out,
               "I": m.ratio, "k_int": m.total_curvature,
               "k2_int": m.curvature_energy, "gb_residual": m.gb_residual}
    _write_json(os.path.join(out, "ratio.json"), payload)
    print(f"I = {m.ratio:.12g}")
    return payload


def _trajectory_row(state) -> str:
    m = state.metrics
    vals = [state.step_count, state.tau, m.length_g, m.area_in, m.area_out,
            m.ratio, m.total_curvature, m.curvature_energy, m.gb_residual]
    return ",".join([str(state.step_count)] + [_fmt(v) for v in vals[1:]])


def _cmd_flow(args) -> dict:
    metric = _load_metric(args.metric)
    curve = ClosedCurve.from_csv(args.curve)
    opts = FlowOptions(curvature_energy_cap=args.energy_cap,
                       max_steps=args.steps, el_tolerance=args.el_tol)
    state = initial_state(curve, metric)
    out = _outdir(args)
    with open(os.path.join(out, "trajectory.csv"), "w", newline="") as fh:
        fh.write(_TRAJECTORY_HEADER + "\n")
        fh.write(_trajectory_row(state) + "\n")
        while state.status is FlowStatus.RUNNING and state.step_count < args.steps:
            state = flow_step(state, metric, opts)
            fh.write(_trajectory_row(state) + "\n")
    state.curve.to_csv(os.path.join(out, "final_curve.csv"))
    summary = {"status": state.status.value, "steps": state.step_count,
               "tau": state.tau, "final_ratio": state.metrics.ratio}
    _write_json(os.path.join(out, "flow.json"), summary)
    print(f"status = {state.status.value}  I = {state.metrics.ratio:.12g}")
    return summary


def _cmd_minimize(args) -> dict:
    metric = _load_metric(args.metric)
    opts = FlowOptions(curvature_energy_cap=args.energy_cap,
                       max_steps=args.steps, el_tolerance=args.el_tol)
    radii = None
    if args.radii is not None:
        radii = [float(v) for v in args.radii.split(",")]
    spec = StartSpec(radii=radii, n_vertices=args.n_vertices,
                     jitter=args.jitter, seed=args.seed)
    report = None
    if args.c1 is not None:
        c2 = args.c2 if args.c2 is not None else args.c1
        consts = cusp_admissibility_constants(args.c1, c2)
        env = cusp_envelope(args.c1, c2, consts.r0)
        report = check_conditions(env, consts.c0, consts.b1, consts.b2,
                                  consts.delta, default_grid(consts.r0),
                                  total_area=metric.total_area)
    result = minimize(metric, starts=spec, opts=opts, report=report,
                      threads=args.threads)
    out = _outdir(args)
    result.best_curve.to_csv(os.path.join(out, "best_curve.csv"))
    _write_json(os.path.join(out, "minimize.json"), result.to_dict())
    print(f"best_ratio = {result.best_ratio:.12g}  "
          f"el_residual = {result.el_residual:.6g}")
    return {"best_ratio": result.best_ratio, "el_residual": result.el_residual}


def _cmd_ricci(args) -> dict:
    if args.metric is not None:
        u0 = _load_metric(args.metric)
    else:
        u0 = cusp_seeded_sphere(args.mass)
    sol = solve_radial(u0, args.t_end, s_max=args.s_max, n_cells=args.cells,
                       n_saves=args.saves)
    out = _outdir(args)
    with open(os.path.join(out, "solution.csv"), "w", newline="") as fh:
        fh.write("t,r,u\n")
        for i, t in enumerate(sol.times):
            for r, u in zip(sol.grid, sol.u_values[i]):
                fh.write(f"{_fmt(t)},{_fmt(r)},{_fmt(u)}\n")
    with open(os.path.join(out, "mass.csv"), "w", newline="") as fh:
        fh.write("t,M\n")
        for t, m in zip(sol.times, sol.mass):
            fh.write(f"{_fmt(t)},{_fmt(m)}\n")
    summary = {"extinction_estimate": sol.extinction_estimate,
               "template_constant": sol.template_constant,
               "maximal_regime": sol.maximal_regime,
               "mass0": float(sol.mass[0])}
    if args.track:
        times = [float(v) for v in args.track.split(",")]
        rows = track_ratio(sol, times, threads=args.threads)
        with open(os.path.join(out, "track.csv"), "w", newline="") as fh:
            fh.write("t,best_ratio,b0,below\n")
            for row in rows:
                if row.get("error"):
                    fh.write(f"{_fmt(row['t'])},error:{row['error']},,\n")
                else:
                    fh.write(f"{_fmt(row['t'])},{_fmt(row['best_ratio'])},"
                             f"{_fmt(row['b0'])},{row['below']}\n")
        summary["tracked"] = len(rows)
    _write_json(os.path.join(out, "ricci.json"), summary)
    print(f"extinction = {sol.extinction_estimate:.12g}")
    return summary


# ---------------------------------------------------------------------------
# parser and dispatch

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="isoflow",
        description="isoperimetric ratio toolkit for finite-area conformal "
                    "plane metrics")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--threads", type=int, default=0,
                        help="worker threads (0 = logical cores)")

    sp = sub.add_parser("check", help="envelope admissibility report")
    sp.add_argument("--c1", type=float, default=1.0)
    sp.add_argument("--c2", type=float, default=1.0)
    sp.add_argument("--metric", default=None,
                    help="optional metric for the area-based threshold")
    sp.add_argument("--grid-span", type=float, default=1e6)
    sp.add_argument("--grid-n", type=int, default=49)
    sp.add_argument("--margins-csv", action="store_true")
    common(sp)
    sp.set_defaults(func=_cmd_check)

    sp = sub.add_parser("ratio", help="evaluate one curve under one metric")
    sp.add_argument("--metric", required=True)
    sp.add_argument("--curve", required=True)
    common(sp)
    sp.set_defaults(func=_cmd_ratio)

    sp = sub.add_parser("flow", help="curve shortening trajectory")
    sp.add_argument("--metric", required=True)
    sp.add_argument("--curve", required=True)
    sp.add_argument("--steps", type=int, default=500)
    sp.add_argument("--energy-cap", type=float, default=10.0)
    sp.add_argument("--el-tol", type=float, default=1e-2)
    common(sp)
    sp.set_defaults(func=_cmd_flow)

    sp = sub.add_parser("minimize", help="multi-start ratio minimization")
    sp.add_argument("--metric", required=True)
    sp.add_argument("--starts", dest="radii", default=None,
                    help="comma-separated start radii (default: auto family)")
    sp.add_argument("--n-vertices", type=int, default=512)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jitter", type=float, default=0.0)
    sp.add_argument("--steps", type=int, default=2000)
    sp.add_argument("--energy-cap", type=float, default=10.0)
    sp.add_argument("--el-tol", type=float, default=1e-2)
    sp.add_argument("--c1", type=float, default=None,
                    help="with --c2: envelope constants for the b0 threshold")
    sp.add_argument("--c2", type=float, default=None)
    common(sp)
    sp.set_defaults(func=_cmd_minimize)

    sp = sub.add_parser("ricci", help="radial log-diffusion run")
    sp.add_argument("--metric", default=None,
                    help="initial profile (default: mass-normalized seed)")
    sp.add_argument("--mass", type=float, default=4.0 * math.pi)
    # the explicit scheme's step size tracks u itself, so runs far past
    # t=0.8 on the default profile grow expensive; stop well short
    sp.add_argument("--t-end", type=float, default=0.5)
    sp.add_argument("--cells", type=int, default=384)
    sp.add_argument("--s-max", type=float, default=15.0)
    sp.add_argument("--saves", type=int, default=33)
    sp.add_argument("--track", default=None,
                    help="comma-separated times for per-slice minimization")
    common(sp)
    sp.set_defaults(func=_cmd_ricci)
    return p


def main(argv=None) -> int:
    level = {"error": logging.ERROR, "info": logging.INFO,
             "debug": logging.DEBUG}.get(
        os.environ.get("ISOFLOW_LOG", "error").lower(), logging.ERROR)
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    t0 = time.monotonic()
    try:
        extra = args.func(args)
    except IsoflowError as exc:
        print(f"error {exc.name}: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _write_json(os.path.join(args.out, "manifest.json"),
                _manifest(args, extra, t0))
    return 0


def script_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    script_main()
