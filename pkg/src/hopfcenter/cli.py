"""
Command-line front end.

Every subcommand prints a JSON document on stdout (``verify`` prints one
PASS/FAIL line per check) and writes its series, surfaces and plot scripts
under ``--out``.  Failures print a single JSON line ``{"error": ..., "message":
...}`` on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from functools import partial
from pathlib import Path

import numpy as np

from . import export, figures
from ._parallel import parallel_map
from .analysis import classify_stability, paper_field, positive_equilibrium
from .boundary import (blowup_time, boundary_curve, classify_facet_solution, facet_solution)
from .experiment import run_experiment
from .integrate import IntegrationError, IntegratorConfig, conserved_drift, integrate
from .invariants import first_integrals
from .network import (BUILTIN_NAMES, NetworkSyntaxError, ReactionNetwork, SystemParams,
                      is_bimolecular, load_network, mass_action_field, network_rank, pretty_print,
                      stoichiometric_matrix)
from .poincare import (POINCARE_CONFIG, FixedPointError, ManifoldError, amplitude_trend,
                       center_manifold_mesh, default_q_grid, near_equilibrium_start, period,
                       section_amplitudes)
from .transform import (CenterPreconditionError, constant_of_motion_V, hamiltonian, planar_field,
                        psi, require_center, stable_manifold_point)
from .verify import CHECKS, run_checks

PORTRAIT_Q = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)
HIGHLIGHT_C = ((-0.3, "-1<C<0", "#1f77b4"), (0.0, "C=0", "magenta"), (1.0, "C>0", "#2ca02c"))


class UsageError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def parse_kappa(text: str, symbols=None) -> SystemParams:
    """``a,b,c,d`` in rate-symbol order, or ``name=value,...``."""
    if "=" in text:
        pairs = {}
        for item in text.split(","):
            name, _, value = item.partition("=")
            pairs[name.strip()] = float(value)
        return SystemParams(pairs)
    values = _floats(text)
    if symbols is not None and len(values) != len(symbols):
        raise UsageError(f"network has {len(symbols)} rate constants {list(symbols)}, got {len(values)}")
    return SystemParams.from_values(values, symbols)


def _network(args) -> tuple[str, ReactionNetwork]:
    src = args.network
    name = src.split(":", 1)[1] if src.startswith("builtin:") else src
    return (name if name in BUILTIN_NAMES else src), load_network(src)


def _paper_params(args) -> SystemParams:
    if args.network not in ("builtin:paper4", "paper4"):
        raise UsageError("this command applies to builtin:paper4 only")
    params = parse_kappa(args.kappa)
    if len(params.kappa) != 4:
        raise UsageError("--kappa needs four values k1,k2,k3,k4")
    return params


def _config(args, **extra) -> IntegratorConfig:
    return IntegratorConfig(rtol=args.rtol, atol=args.atol, **extra)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


# --- subcommands ------------------------------------------------------------

def cmd_parse(args) -> int:
    name, net = _network(args)
    if args.print:
        sys.stdout.write(pretty_print(net))
        return 0
    _emit({
        "network": name,
        "species": list(net.species),
        "reactions": [str(r) for r in net.reactions],
        "rate_symbols": list(net.rate_symbols),
        "stoichiometric_matrix": stoichiometric_matrix(net).tolist(),
        "rank": network_rank(net),
        "bimolecular": is_bimolecular(net),
    })
    return 0


def cmd_classify(args) -> int:
    _emit(classify_stability(_paper_params(args), assume_center=args.assume_center).to_dict())
    return 0


def cmd_simulate(args) -> int:
    name, net = _network(args)
    params = parse_kappa(args.kappa, net.rate_symbols)
    n = len(net.species)
    if args.y0:
        y0 = np.array(_floats(args.y0))
        if y0.size != n:
            raise UsageError(f"--y0 needs {n} values")
    else:
        y0 = np.random.default_rng(args.seed).uniform(0.2, 3.0, size=n)
    if np.any(y0 < 0):
        raise UsageError("--y0 must be nonnegative")

    integrals = first_integrals(name, params) if name in BUILTIN_NAMES else {}
    centered = None
    if name == "paper4":
        try:
            centered = require_center(params, args.assume_center)
            integrals["V"] = lambda s: constant_of_motion_V(centered, s)
        except CenterPreconditionError:
            pass
    rhs = paper_field(params) if name == "paper4" else mass_action_field(net, params)

    out = _out(args)
    try:
        traj = integrate(rhs, y0, (0.0, args.t_end), _config(args, max_time=max(1e4, args.t_end)))
    except IntegrationError as exc:
        export.write_trajectory_csv(out / "trajectory.csv", exc.trajectory, net.species)
        raise
    csv_path = export.write_trajectory_csv(out / "trajectory.csv", traj, net.species, dense=args.dense)

    drifts = {k: conserved_drift(traj, fn) for k, fn in integrals.items()}
    if centered is not None and np.all(traj.states[:, :2] > 0):
        drifts["H"] = conserved_drift(traj, lambda s: hamiltonian(centered, *psi(centered, s)[:2]))
    report = {
        "network": name,
        "species": list(net.species),
        "kappa": dict(params.kappa),
        "y0": y0.tolist(),
        "t_end": args.t_end,
        "rtol": args.rtol,
        "atol": args.atol,
        "stats": traj.stats,
        "drift": drifts,
        "final_state": traj.y_final.tolist(),
        "csv": str(csv_path),
    }
    if "V" in drifts:
        report["V_drift"] = drifts["V"]
    if "H" in drifts:
        report["H_drift"] = drifts["H"]
    export.write_json(out / "simulate.json", report)
    _emit(report)
    return 0


def planar_level_curve(params: SystemParams, q: float, samples: int = 801) -> np.ndarray:
    """One period of the planar ``(p, q)`` flow from ``(0, q)`` as rows ``t, p, q``."""
    tau = period(params, q)
    traj = integrate(planar_field(params), [0.0, q], (0.0, tau), POINCARE_CONFIG)
    ts, ys = traj.resample(samples)
    return np.column_stack([ts, ys])


def cmd_manifold(args) -> int:
    params = require_center(_paper_params(args), args.assume_center)
    out = _out(args)
    grid = default_q_grid(args.n_q, args.q_min, args.q_max)
    mesh = center_manifold_mesh(params, grid, args.samples)

    orbit_files = export.write_orbit_csvs(out, mesh)
    level_curves = [planar_level_curve(params, q) for q in PORTRAIT_Q]
    pq_files = [export.write_csv(out / f"pq_{i:02d}.csv", ["t", "p", "q"], curve)
                for i, curve in enumerate(level_curves)]
    export.write_mesh_csv(out / "mesh.csv", mesh)
    export.write_obj(out / "center_manifold.obj", mesh, center=positive_equilibrium(params))

    # the stable manifold is unbounded as x -> 0; sample it up to y = 10 * sqrt(k4/k2)
    x_max = math.sqrt(params.k4 / params.k2)
    stable = np.array([stable_manifold_point(params, x) for x in np.linspace(x_max / 10, x_max, 200)])
    export.write_csv(out / "stable_manifold.csv", ["x", "y", "z"], stable)
    taus = np.linspace(args.tau_min, args.tau_max, 401)
    curve = boundary_curve(params, taus)
    export.write_csv(out / "boundary_curve.csv", ["tau", "x", "y", "z"], np.column_stack([taus, curve]))

    (out / "center_manifold.gp").write_text(export.gnuplot_manifold_script(
        [p.name for p in orbit_files], "stable_manifold.csv", "boundary_curve.csv"), encoding="utf-8")
    (out / "hamiltonian_portrait.gp").write_text(
        export.gnuplot_hamiltonian_script([p.name for p in pq_files]), encoding="utf-8")
    pngs = []
    if not args.no_png:
        box = 3.0 * float(np.max(positive_equilibrium(params)))
        pngs.append(figures.render_center_manifold([o.xyz for o in mesh.orbits], stable, curve,
                                                   out / "center_manifold.png", box=box))
        pngs.append(figures.render_hamiltonian_portrait([c[:, 1:] for c in level_curves],
                                                        out / "hamiltonian_portrait.png"))

    pts = mesh.points
    report = {
        "kappa": dict(params.kappa),
        "q_grid": grid.tolist(),
        "records": [dict(zip(["q", "tau", "h", "contraction_measured", "contraction_bound"], r.to_row()))
                    for r in mesh.records],
        "max_residual": max(r.residual for r in mesh.records),
        "max_closure_error": max(o.closure_error for o in mesh.orbits),
        "max_yz": float(np.max(pts[:, 1] * pts[:, 2])),
        "yz_bound": 2 * params.k4 / params.k3,
        "out": str(out),
        "figures": [str(p) for p in pngs],
    }
    export.write_json(out / "manifold.json", report)
    _emit(report)
    return 0


def _facet_branch(C: float, tau_lo: float, tau_hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    lo = tau_lo if C >= 0 else max(tau_lo, blowup_time(C) + 1e-3)
    taus = np.linspace(lo, tau_hi, n)
    y, z = facet_solution(C, taus)
    return taus, np.column_stack([y, z])


def cmd_boundary(args) -> int:
    out = _out(args)
    if args.c_grid:
        c_grid = _floats(args.c_grid)
    else:
        c_grid = [float(c) + 0.0 for c in np.round(np.linspace(-0.9, 3.0, 14), 6)]  # + 0.0 drops -0.0
    family_files, family = [], []
    classes = {}
    for i, C in enumerate(c_grid):
        taus, yz = _facet_branch(C, args.tau_min, args.tau_max, args.samples)
        family_files.append(export.write_csv(out / f"facet_{i:02d}.csv", ["tau", "y", "z"],
                                             np.column_stack([taus, yz])).name)
        family.append((yz[:, 0], yz[:, 1]))
        classes[repr(float(C))] = classify_facet_solution(C).value
    highlight_files, highlights = [], []
    for j, (C, title, colour) in enumerate(HIGHLIGHT_C):
        taus, yz = _facet_branch(C, args.tau_min, args.tau_max, args.samples)
        fname = export.write_csv(out / f"facet_highlight_{j}.csv", ["tau", "y", "z"],
                                 np.column_stack([taus, yz])).name
        highlight_files.append((fname, title, colour))
        highlights.append((yz[:, 0], yz[:, 1], title, colour))
        classes[repr(float(C))] = classify_facet_solution(C).value

    params = parse_kappa(args.kappa)
    taus = np.linspace(args.tau_min, args.tau_max, args.samples)
    export.write_csv(out / "boundary_curve.csv", ["tau", "x", "y", "z"],
                     np.column_stack([taus, boundary_curve(params, taus)]))
    (out / "facet_portrait.gp").write_text(export.gnuplot_facet_script(family_files, highlight_files),
                                           encoding="utf-8")
    pngs = []
    if not args.no_png:
        pngs.append(str(figures.render_facet_portrait(family, highlights, out / "facet_portrait.png")))
    report = {"c_grid": [float(c) for c in c_grid], "classes": classes,
              "blowup_times": {repr(float(c)): blowup_time(c) for c in c_grid if c < 0},
              "out": str(out), "figures": pngs}
    export.write_json(out / "boundary.json", report)
    _emit(report)
    return 0


def _scan_row(k1: float, base: SystemParams, n_returns: int) -> list:
    params = base.replace(k1=k1)
    rep = classify_stability(params)
    amps = section_amplitudes(params, near_equilibrium_start(params), n_returns)
    return [k1, rep.stability.value, float(np.max(rep.eigenvalues.real)), amplitude_trend(amps),
            float(amps[0]) if amps.size else math.nan, float(amps[-1]) if amps.size else math.nan]


def cmd_scan(args) -> int:
    base = _paper_params(args)
    if args.k1:
        k1s = _floats(args.k1)
    else:
        start, stop, step = _floats(args.k1_range)
        n = int(math.floor((stop - start) / step + 1e-9)) + 1 if stop >= start else 0
        k1s = [round(start + i * step, 12) for i in range(n)]
    rows = parallel_map(partial(_scan_row, base=base, n_returns=args.returns), k1s)
    out = _out(args)
    header = ["k1", "class", "max_re", "trend", "amp_first", "amp_last"]
    path = export.write_csv(out / "scan.csv", header, rows)
    _emit({"csv": str(path), "rows": [dict(zip(header, r)) for r in rows]})
    return 0


def cmd_verify(args) -> int:
    ids = args.only.split(",") if args.only else None
    unknown = [i for i in ids or [] if i not in CHECKS]
    if unknown:
        raise UsageError(f"unknown check ids {unknown}; known: {list(CHECKS)}")
    results = []
    for cid in ids or list(CHECKS):
        res = run_checks([cid])[0]
        print(res.line(), flush=True)
        results.append(res)
    if args.out:
        export.write_json(_out(args) / "verify.json",
                          [{"id": r.id, "title": r.title, "passed": r.passed, "detail": r.detail}
                           for r in results])
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return 1 if n_fail else 0


def cmd_experiment(args) -> int:
    params = _paper_params(args)
    report = run_experiment(params, n_seeds=args.n_seeds, t_end=args.t_end, seed=args.seed,
                            escape_norm=args.escape_norm, rtol=args.rtol)
    path = export.write_json(_out(args) / "experiment.json", report)
    summary = {k: v for k, v in report.items() if k != "runs"}
    summary["report"] = str(path)
    _emit(summary)
    return 0


# --- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kappa", default="2,1,1,1",
                        help="rate constants, 'a,b,c,...' in rate-symbol order or 'name=value,...'")
    common.add_argument("--network", default="builtin:paper4", help="PATH to a .crn file or builtin:NAME")
    common.add_argument("--rtol", type=float, default=1e-10)
    common.add_argument("--atol", type=float, default=1e-12)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--assume-center", action="store_true",
                        help="treat k1 = k2 + k3 as satisfied without the tolerance check")
    common.add_argument("--dense", type=int, default=0, help="resample series to N equispaced points")

    parser = argparse.ArgumentParser(prog="hopfcenter", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse a network and report its structure")
    p.add_argument("--print", action="store_true", help="print the canonical DSL text instead")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("classify", parents=[common], help="stability class of the positive equilibrium")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", parents=[common], help="integrate and report conserved-quantity drift")
    p.add_argument("--y0", help="initial state, comma separated (default: seeded random)")
    p.add_argument("--t-end", type=float, default=100.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("manifold", parents=[common], help="center manifold mesh, orbits and plot scripts")
    p.add_argument("--n-q", type=int, default=16)
    p.add_argument("--q-min", type=float, default=0.05)
    p.add_argument("--q-max", type=float, default=4.0)
    p.add_argument("--samples", type=int, default=256, help="points per orbit")
    p.add_argument("--tau-min", type=float, default=-8.0)
    p.add_argument("--tau-max", type=float, default=8.0)
    p.add_argument("--no-png", action="store_true")
    p.set_defaults(func=cmd_manifold)

    p = sub.add_parser("boundary", parents=[common], help="facet phase portrait and boundary curve")
    p.add_argument("--c-grid", help="comma separated C values (> -1) for the grey family")
    p.add_argument("--tau-min", type=float, default=-8.0)
    p.add_argument("--tau-max", type=float, default=8.0)
    p.add_argument("--samples", type=int, default=1601)
    p.add_argument("--no-png", action="store_true")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("scan", parents=[common], help="classification and amplitude trend over k1")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--k1-range", default="1.8,2.2,0.1", help="start,stop,step (inclusive)")
    g.add_argument("--k1", help="explicit comma separated k1 values")
    p.add_argument("--returns", type=int, default=10)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--only", help="comma separated check ids")
    p.set_defaults(func=cmd_verify, out=None)

    p = sub.add_parser("experiment", parents=[common], help="seeded ensemble off the bifurcation set")
    p.add_argument("--n-seeds", type=int, default=100)
    p.add_argument("--t-end", type=float, default=500.0)
    p.add_argument("--escape-norm", type=float, default=1e3)
    p.set_defaults(func=cmd_experiment, rtol=1e-9)
    return parser


_ERRORS = (UsageError, NetworkSyntaxError, CenterPreconditionError, FixedPointError, ManifoldError,
           IntegrationError, ValueError, KeyError, OSError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except _ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(json.dumps({"error": type(exc).__name__, "command": args.command,
                          "message": " ".join(str(msg).split())}), file=sys.stderr)
        return 3 if isinstance(exc, IntegrationError) else 2


if __name__ == "__main__":
    sys.exit(main())
