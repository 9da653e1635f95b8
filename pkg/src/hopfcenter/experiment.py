"""
Seeded ensemble runs off the bifurcation set.

For ``k1 > k2 + k3`` the harness records how many random positive starts end
up at the positive equilibrium; for ``k1 < k2 + k3`` how many grow past a
norm threshold.  These are observations only; neither question is settled
by them.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from ._parallel import parallel_map
from .analysis import CENTER_TOL, hurwitz_discriminant, paper_field, positive_equilibrium
from .integrate import Event, IntegrationError, IntegratorConfig, integrate
from .network import SystemParams

__all__ = ["EMPIRICAL_LABEL", "random_starts", "run_experiment"]

EMPIRICAL_LABEL = "empirical: open question, numerical observation only"


def random_starts(params: SystemParams, n: int, seed: int, spread: float = 1.5) -> np.ndarray:
    """Log-uniform positive states within a factor ``e^spread`` of the equilibrium."""
    rng = np.random.default_rng(seed)
    eq = positive_equilibrium(params)
    return eq * np.exp(rng.uniform(-spread, spread, size=(n, 3)))


def _run_one(state0, params: SystemParams, t_end: float, escape_norm: float, n_curve: int,
             rtol: float) -> dict:
    eq = positive_equilibrium(params)
    cfg = IntegratorConfig(rtol=rtol, atol=rtol * 1e-2, max_time=max(1e4, t_end))
    escape = Event(g=lambda t, s: float(np.linalg.norm(s)) - escape_norm, direction="rising",
                   label="escape", terminal=1)
    try:
        traj = integrate(paper_field(params), state0, (0.0, t_end), cfg, events=[escape])
        failed = False
    except IntegrationError as exc:
        traj = exc.trajectory
        failed = True
    t_stop = traj.t_final
    ts = np.linspace(0.0, t_end, n_curve)
    ts = ts[ts <= t_stop]
    dist = np.linalg.norm(traj.dense(ts) - eq, axis=1) if len(traj.dense.t0s) else np.array([])
    final = traj.y_final
    return {
        "start": [float(v) for v in state0],
        "t_stop": t_stop,
        "escaped": bool(traj.events) or failed and float(np.linalg.norm(final)) > escape_norm,
        "final_distance": float(np.linalg.norm(final - eq)),
        "final_norm": float(np.linalg.norm(final)),
        "curve_t": [float(t) for t in ts],
        "curve_distance": [float(d) for d in dist],
    }


def run_experiment(params: SystemParams, n_seeds: int = 100, t_end: float = 500.0, seed: int = 0,
                   escape_norm: float = 1e3, converge_tol: float = 1e-6, n_curve: int = 51,
                   rtol: float = 1e-9, n_stable_probe: int = 5) -> dict:
    """Ensemble report; raises ``ValueError`` on the bifurcation set."""
    disc = hurwitz_discriminant(params)
    if abs(disc) <= CENTER_TOL:
        raise ValueError("experiment needs k1 != k2 + k3")
    case = "a" if disc > 0 else "b"
    work = functools.partial(_run_one, params=params, t_end=t_end, escape_norm=escape_norm,
                             n_curve=n_curve, rtol=rtol)
    runs = parallel_map(work, list(random_starts(params, n_seeds, seed)))

    # starts on the set that is the stable manifold at the center, used as a probe
    x_max = math.sqrt(params.k4 / params.k2)
    probe_x = np.linspace(x_max / (n_stable_probe + 1), x_max * n_stable_probe / (n_stable_probe + 1),
                          n_stable_probe)
    probes = []
    for x in probe_x:
        y = params.k4 / (params.k2 * x)
        r = _run_one(np.array([x, y, y - x]), params, t_end, escape_norm, n_curve, rtol)
        probes.append({"start": r["start"], "final_distance": r["final_distance"], "escaped": r["escaped"]})

    report = {
        "label": EMPIRICAL_LABEL,
        "case": case,
        "question": ("is the positive equilibrium globally asymptotically stable?" if case == "a"
                     else "are all solutions off the stable manifold unbounded?"),
        "kappa": [params.k1, params.k2, params.k3, params.k4],
        "n_seeds": n_seeds,
        "seed": seed,
        "t_end": t_end,
        "escape_norm": escape_norm,
        "converge_tol": converge_tol,
        "fraction_converged": sum(r["final_distance"] <= converge_tol for r in runs) / n_seeds,
        "fraction_escaped": sum(r["escaped"] for r in runs) / n_seeds,
        "stable_set_probe": probes,
        "runs": runs,
    }
    return report
