"""
Return maps on the section ``{p = 0, q > 0}`` and the center manifold they define.

In the center case the planar ``(p, q)`` flow is integrable, so the period
``tau_q`` of the closed level curve through ``(0, q)`` is computed on the
planar system alone.  The spatial return map ``R(q, .)`` then advances the
full ``(p, q, r)`` system by exactly ``tau_q``; it is a contraction and its
fixed point ``h(q)`` marks the periodic orbit on the invariant surface.
"""

from __future__ import annotations

import enum
import functools
import math
import statistics
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._parallel import parallel_map
from .analysis import paper_field, positive_equilibrium
from .integrate import Event, IntegrationError, IntegratorConfig, integrate
from .network import SystemParams
from .transform import (hamiltonian, level_set, planar_field, psi, psi_inverse, require_center,
                        transformed_field)

__all__ = [
    "POINCARE_CONFIG",
    "FixedPointError",
    "ManifoldError",
    "PoincareRecord",
    "PeriodicOrbit",
    "CenterManifoldMesh",
    "OmegaLimitKind",
    "OmegaLimit",
    "period",
    "return_map",
    "contraction_bound",
    "center_fixed_point",
    "periodic_orbit",
    "center_manifold_mesh",
    "default_q_grid",
    "omega_limit",
    "section_amplitudes",
    "amplitude_trend",
    "near_equilibrium_start",
]

#: tolerances used for every return-map computation
POINCARE_CONFIG = IntegratorConfig(rtol=1e-12, atol=1e-14)


class FixedPointError(RuntimeError):
    pass


class ManifoldError(RuntimeError):
    pass


@dataclass(frozen=True)
class PoincareRecord:
    q: float
    L: float
    tau: float
    h: float
    contraction_measured: float
    contraction_bound: float
    iterations: int = 0
    residual: float = 0.0

    def to_row(self) -> list[float]:
        return [self.q, self.tau, self.h, self.contraction_measured, self.contraction_bound]


@dataclass(frozen=True)
class PeriodicOrbit:
    record: PoincareRecord
    times: np.ndarray
    pqr: np.ndarray
    xyz: np.ndarray
    closure_error: float


@dataclass(frozen=True)
class CenterManifoldMesh:
    params: SystemParams
    records: list[PoincareRecord]
    orbits: list[PeriodicOrbit]

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([o.xyz for o in self.orbits]) if self.orbits else np.empty((0, 3))


def _section_event(terminal: int) -> Event:
    return Event(g=lambda t, s: s[0], direction="falling", label="section",
                 where=lambda t, s: s[1] > 0, terminal=terminal)


def period(params: SystemParams, q: float, cfg: IntegratorConfig = POINCARE_CONFIG) -> float:
    """Minimal period of the planar orbit through ``(p, q) = (0, q)``."""
    params = require_center(params)
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    guess = 2 * math.pi / params.omega
    horizon = min(cfg.max_time, 50 * guess * (1 + q))
    traj = integrate(planar_field(params), [0.0, q], (0.0, horizon), cfg, events=[_section_event(1)])
    if not traj.events:
        raise IntegrationError(f"no return to the section within t={horizon}", traj)
    return traj.events[0][0]


def return_map(params: SystemParams, q: float, r: float, tau: float | None = None,
               cfg: IntegratorConfig = POINCARE_CONFIG) -> float:
    """``r``-coordinate after flowing ``(0, q, r)`` for one period ``tau_q``."""
    params = require_center(params)
    if tau is None:
        tau = period(params, q, cfg)
    traj = integrate(transformed_field(params), [0.0, q, r], (0.0, tau), cfg)
    return float(traj.y_final[2])


def contraction_bound(params: SystemParams, q: float, tau: float | None = None) -> float:
    """``exp(-K tau_q)`` with ``K = 2 alpha exp(q_minus / 2)``."""
    params = require_center(params)
    if tau is None:
        tau = period(params, q)
    q_minus = level_set(params, hamiltonian(params, 0.0, q)).q_minus
    K = 2 * params.alpha * math.exp(q_minus / 2)
    return math.exp(-K * tau)


def center_fixed_point(params: SystemParams, q: float, r0: float = 0.0, tol: float = 1e-12,
                       max_iter: int = 200, noise_floor: float = 1e-10,
                       cfg: IntegratorConfig = POINCARE_CONFIG) -> PoincareRecord:
    """Iterate ``r <- R(q, r)`` to the fixed point ``h(q)``.

    Stops when a step is below ``tol``, or when steps below ``noise_floor``
    stop decreasing (the numerical return map is only that smooth).

    The measured contraction is the median of successive step ratios
    ``|dr_{n+1}| / |dr_n|`` taken while the steps are above roundoff.
    """
    params = require_center(params)
    tau = period(params, q, cfg)
    r = r0
    steps = []
    for it in range(1, max_iter + 1):
        r_new = return_map(params, q, r, tau, cfg)
        steps.append(abs(r_new - r))
        r = r_new
        if steps[-1] <= tol:
            break
        # integration noise floor: the step no longer shrinks but is already tiny
        if len(steps) >= 2 and steps[-1] >= steps[-2] and steps[-1] <= noise_floor:
            break
    else:
        raise FixedPointError(f"no fixed point of R(q={q}, .) after {max_iter} iterations "
                              f"(last step {steps[-1]:.3g}); tighten the integration tolerance")
    ratios = [b / a for a, b in zip(steps, steps[1:]) if a > 1e-9]
    if ratios:
        measured = statistics.median(ratios)
    else:
        # converged before two usable steps: secant slope across a unit bracket
        measured = abs(return_map(params, q, r + 0.5, tau, cfg) - return_map(params, q, r - 0.5, tau, cfg))
    residual = abs(return_map(params, q, r, tau, cfg) - r)
    return PoincareRecord(
        q=q,
        L=hamiltonian(params, 0.0, q),
        tau=tau,
        h=r,
        contraction_measured=measured,
        contraction_bound=contraction_bound(params, q, tau),
        iterations=it,
        residual=residual,
    )


def periodic_orbit(params: SystemParams, record: PoincareRecord, samples: int = 256,
                   cfg: IntegratorConfig = POINCARE_CONFIG) -> PeriodicOrbit:
    """Sample the orbit through ``(0, q, h(q))`` at ``samples`` equal time steps over one period."""
    params = require_center(params)
    traj = integrate(transformed_field(params), [0.0, record.q, record.h], (0.0, record.tau), cfg)
    ts = np.linspace(0.0, record.tau, samples + 1)
    pqr = traj.dense(ts)
    pqr[-1] = traj.y_final
    xyz = np.array([psi_inverse(params, s) for s in pqr])
    if np.any(xyz[:, 2] <= 0):
        raise ManifoldError(f"orbit at q={record.q} leaves the positive orthant (min z={xyz[:, 2].min():.3g})")
    closure = float(np.max(np.abs(xyz[-1] - xyz[0])))
    return PeriodicOrbit(record=record, times=ts, pqr=pqr, xyz=xyz, closure_error=closure)


def default_q_grid(n: int = 16, q_min: float = 0.05, q_max: float = 4.0) -> np.ndarray:
    return np.geomspace(q_min, q_max, n)


def _mesh_item(q: float, params: SystemParams, samples: int) -> tuple[PoincareRecord, PeriodicOrbit]:
    rec = center_fixed_point(params, q)
    return rec, periodic_orbit(params, rec, samples)


def center_manifold_mesh(params: SystemParams, q_grid: Sequence[float] | None = None,
                         samples_per_orbit: int = 256) -> CenterManifoldMesh:
    params = require_center(params)
    q_grid = default_q_grid() if q_grid is None else np.asarray(q_grid, dtype=float)
    work = functools.partial(_mesh_item, params=params, samples=samples_per_orbit)
    results = parallel_map(work, sorted(float(q) for q in q_grid))
    return CenterManifoldMesh(params=params, records=[r for r, _ in results], orbits=[o for _, o in results])


class OmegaLimitKind(str, enum.Enum):
    EQUILIBRIUM = "Equilibrium"
    PERIODIC_ORBIT = "PeriodicOrbit"


@dataclass(frozen=True)
class OmegaLimit:
    kind: OmegaLimitKind
    record: PoincareRecord | None = None
    #: |r_n - h(q)| at successive section crossings of the simulated orbit
    distances: list[float] = field(default_factory=list)
    validated: bool | None = None


def omega_limit(params: SystemParams, state: Sequence[float], validate: bool = True,
                n_periods: int = 20, floor: float = 1e-9) -> OmegaLimit:
    """Predict the omega-limit set of a positive state from its level of ``H``.

    With ``validate`` the orbit is integrated for ``n_periods`` periods and the
    distance to the predicted periodic orbit, measured on the section, must
    decrease from each crossing to the next until it reaches ``floor``.
    """
    params = require_center(params)
    state = np.asarray(state, dtype=float)
    if np.any(state <= 0):
        raise ValueError(f"state must be strictly positive, got {state}")
    p, q, r = psi(params, state)
    L = hamiltonian(params, p, q)
    if L <= 1e-12:
        return OmegaLimit(OmegaLimitKind.EQUILIBRIUM)
    q_plus = level_set(params, L).q_plus
    rec = center_fixed_point(params, q_plus)
    if not validate:
        return OmegaLimit(OmegaLimitKind.PERIODIC_ORBIT, rec)
    traj = integrate(transformed_field(params), [p, q, r], (0.0, (n_periods + 1) * rec.tau), POINCARE_CONFIG,
                     events=[_section_event(n_periods)])
    dist = [abs(s[2] - rec.h) for s in traj.event_states]
    ok = len(dist) >= 2 and all(b < a or b <= floor for a, b in zip(dist, dist[1:]))
    return OmegaLimit(OmegaLimitKind.PERIODIC_ORBIT, rec, dist, ok)


def section_amplitudes(params: SystemParams, state0: Sequence[float], n_returns: int = 10,
                       cfg: IntegratorConfig = POINCARE_CONFIG) -> np.ndarray:
    """``q`` at successive downward crossings of ``x - y + z = 0`` with ``q > 0``.

    Works for any positive rate constants: the original system is integrated
    and the crossings are read off in the coordinates of :func:`psi`.
    """
    c_q = math.log(params.k4 / params.k2)

    def q_of(s):
        return math.log(s[0] * s[1]) - c_q if s[0] > 0 and s[1] > 0 else -math.inf

    ev = Event(g=lambda t, s: s[0] - s[1] + s[2], direction="falling", label="section",
               where=lambda t, s: q_of(s) > 0, terminal=n_returns)
    horizon = min(cfg.max_time, 20 * n_returns * 2 * math.pi / params.omega)
    traj = integrate(paper_field(params), state0, (0.0, horizon), cfg, events=[ev])
    return np.array([q_of(s) for s in traj.event_states])


def amplitude_trend(amplitudes: Sequence[float], neutral_tol: float = 1e-6) -> int:
    """-1 contracting, +1 expanding, 0 if every amplitude is within ``neutral_tol`` of the first."""
    amps = np.asarray(amplitudes, dtype=float)
    if amps.size < 2 or np.max(np.abs(amps - amps[0])) <= neutral_tol:
        return 0
    return int(np.sign(amps[-1] - amps[0]))


def near_equilibrium_start(params: SystemParams, q0: float = 0.5) -> np.ndarray:
    """Positive state on the section ``p = 0`` with ``q = q0`` and ``r = 0``."""
    return psi_inverse(params, [0.0, q0, 0.0])
