"""
Executable acceptance checks.

Each check is a zero-argument function returning a :class:`CheckResult`;
:data:`CHECKS` maps a short id to it.  ``hopfcenter verify`` and the
acceptance tests both run this registry.
"""

from __future__ import annotations

import io
import math
import string
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import StabilityClass, charpoly_coefficients, classify_stability, paper_field
from .boundary import blowup_time, boundary_curve, facet_rhs, facet_solution, norm_pdf
from .integrate import IntegratorConfig, conserved_drift, integrate
from .invariants import ivanova_integral, lotka_integral, symmetric9_integral
from .network import (Complex, Reaction, ReactionNetwork, SystemParams, BUILTIN_NAMES, builtin,
                      mass_action_field, parse_network, pretty_print)
from .poincare import (amplitude_trend, center_manifold_mesh, contraction_bound, default_q_grid,
                       near_equilibrium_start, omega_limit, OmegaLimitKind, period, return_map,
                       section_amplitudes)
from .transform import (constant_of_motion_V, psi, psi_inverse, stable_manifold_point,
                        transformed_rhs)

__all__ = ["CheckResult", "CHECKS", "run_checks", "fuzz_network", "CENTER_KAPPA"]

CENTER_KAPPA = SystemParams.from_values([2.0, 1.0, 1.0, 1.0])


@dataclass(frozen=True)
class CheckResult:
    id: str
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id:>3} {self.title}: {self.detail}"


CHECKS: dict[str, Callable[[], CheckResult]] = {}


def _check(cid: str, title: str):
    def deco(fn):
        def run() -> CheckResult:
            passed, detail = fn()
            return CheckResult(cid, title, bool(passed), detail)
        run.__name__ = fn.__name__
        CHECKS[cid] = run
        return run
    return deco


# --- 1 ----------------------------------------------------------------------

@_check("1", "Routh-Hurwitz classification on 1000 random kappa")
def _routh_hurwitz():
    rng = np.random.default_rng(101)
    mismatches = 0
    worst = ""
    for i in range(1000):
        k = np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=4))
        if i % 10 == 0:
            k[0] = k[1] + k[2]  # land on the bifurcation set
        params = SystemParams.from_values(k)
        rep = classify_stability(params)
        disc = k[0] - k[1] - k[2]
        expected = (StabilityClass.CENTER if abs(disc) <= 1e-12
                    else StabilityClass.STABLE if disc > 0 else StabilityClass.UNSTABLE)
        a2, a1, a0 = charpoly_coefficients(params)
        re = np.sort(rep.eigenvalues.real)
        if expected is StabilityClass.STABLE:
            eig_ok = re[-1] < 1e-9
        elif expected is StabilityClass.UNSTABLE:
            eig_ok = re[-1] > -1e-9
        else:
            eig_ok = abs(re[-1]) <= 1e-9 and abs(re[-2]) <= 1e-9 and re[0] < 0
        hurwitz_ok = expected is StabilityClass.CENTER or np.sign(a2 * a1 - a0) == np.sign(disc)
        if rep.stability is not expected or not eig_ok or not hurwitz_ok:
            mismatches += 1
            worst = f"kappa={k.tolist()} got {rep.stability.value}"
    return mismatches == 0, f"{mismatches} mismatches" + (f" (e.g. {worst})" if worst else "")


# --- 2, 3 -------------------------------------------------------------------

_DRIFT_CFG = IntegratorConfig(rtol=1e-10, atol=1e-12)


@_check("2", "V drift over t in [0,100], 20 starts, kappa=(2,1,1,1)")
def _v_drift():
    rng = np.random.default_rng(202)
    V = lambda s: constant_of_motion_V(CENTER_KAPPA, s)
    worst = 0.0
    for s0 in rng.uniform(0.2, 3.0, size=(20, 3)):
        traj = integrate(paper_field(CENTER_KAPPA), s0, (0.0, 100.0), _DRIFT_CFG)
        worst = max(worst, conserved_drift(traj, V))
    return worst <= 1e-6, f"max drift {worst:.3g} (tol 1e-6)"


def _builtin_drift(name, params, fn, y0):
    traj = integrate(mass_action_field(builtin(name), params), y0, (0.0, 100.0), _DRIFT_CFG)
    return conserved_drift(traj, fn)


@_check("3a", "Lotka integral drift over t in [0,100]")
def _lotka():
    p = SystemParams.from_values([1.0, 1.0, 1.0])
    d = _builtin_drift("lotka", p, lotka_integral(p), [0.5, 1.8])
    return d <= 1e-6, f"drift {d:.3g} (tol 1e-6)"


@_check("3b", "Ivanova integral drift over t in [0,100]")
def _ivanova():
    p = SystemParams.from_values([1.0, 2.0, 1.5])
    d = _builtin_drift("ivanova", p, ivanova_integral(p), [0.5, 1.0, 1.5])
    return d <= 1e-6, f"drift {d:.3g} (tol 1e-6)"


@_check("3c", "xyz/(x+y+z)^3 drift for symmetric9 at alpha=2beta")
def _symmetric9():
    p = SystemParams({"alpha": 2.0, "beta": 1.0, "gamma": 1.0})
    d = _builtin_drift("symmetric9", p, symmetric9_integral(p), [0.2, 0.5, 1.1])
    return d <= 1e-6, f"drift {d:.3g} (tol 1e-6)"


# --- 4 ----------------------------------------------------------------------

@_check("4a", "psi o psi^-1 and psi^-1 o psi identities at 1000 points")
def _psi_identity():
    rng = np.random.default_rng(404)
    worst = 0.0
    for t in rng.uniform(-3.0, 3.0, size=(1000, 3)):
        back = np.array(psi(CENTER_KAPPA, psi_inverse(CENTER_KAPPA, t)))
        worst = max(worst, float(np.max(np.abs(back - t) / (1 + np.abs(t)))))
    states = rng.uniform(0.05, 5.0, size=(1000, 3))
    states[:, 2] *= rng.choice([-1.0, 1.0], size=1000)  # psi is defined for any z
    for s in states:
        back = psi_inverse(CENTER_KAPPA, psi(CENTER_KAPPA, s))
        worst = max(worst, float(np.max(np.abs(back - s) / (1 + np.abs(s)))))
    return worst <= 1e-12, f"max relative error {worst:.3g} (tol 1e-12)"


def _directional_derivative(fun, s, v, eps):
    d1 = (np.asarray(fun(s + eps * v)) - np.asarray(fun(s - eps * v))) / (2 * eps)
    e2 = eps / 2
    d2 = (np.asarray(fun(s + e2 * v)) - np.asarray(fun(s - e2 * v))) / (2 * e2)
    return (4 * d2 - d1) / 3


@_check("4b", "pushforward D(psi) f = f_pqr o psi at 100 points")
def _pushforward():
    rng = np.random.default_rng(405)
    f = paper_field(CENTER_KAPPA)
    worst = 0.0
    for s in rng.uniform(0.2, 3.0, size=(100, 3)):
        v = f(0.0, s)
        eps = 1e-3 * min(s[0], s[1]) / (1 + np.linalg.norm(v))
        lhs = _directional_derivative(lambda u: psi(CENTER_KAPPA, u), s, v, eps)
        rhs = transformed_rhs(CENTER_KAPPA, psi(CENTER_KAPPA, s))
        worst = max(worst, float(np.linalg.norm(lhs - rhs) / (1 + np.linalg.norm(rhs))))
    return worst <= 1e-8, f"max relative error {worst:.3g} (tol 1e-8)"


# --- 5, 6 -------------------------------------------------------------------

@_check("5", "return map contraction |dR| <= exp(-K tau)|dr| for q in {0.5,1,2}")
def _contraction():
    details = []
    ok = True
    for q in (0.5, 1.0, 2.0):
        tau = period(CENTER_KAPPA, q)
        dR = abs(return_map(CENTER_KAPPA, q, 1.0, tau) - return_map(CENTER_KAPPA, q, -1.0, tau))
        bound = contraction_bound(CENTER_KAPPA, q, tau) * 2.0
        ok &= dR <= bound + 1e-9
        details.append(f"q={q}: {dR:.3g}<={bound:.3g}")
    return ok, "; ".join(details)


_MESH_CACHE: dict = {}


def _mesh():
    if "mesh" not in _MESH_CACHE:
        _MESH_CACHE["mesh"] = center_manifold_mesh(CENTER_KAPPA, default_q_grid(16), 256)
    return _MESH_CACHE["mesh"]


@_check("6a", "fixed-point residual |R(q,h)-h| on the 16-point q-grid")
def _mesh_residual():
    worst = max(r.residual for r in _mesh().records)
    return worst <= 1e-10, f"max residual {worst:.3g} (tol 1e-10)"


@_check("6b", "reconstructed orbits close")
def _mesh_closure():
    worst = max(o.closure_error for o in _mesh().orbits)
    return worst <= 1e-6, f"max closure error {worst:.3g} (tol 1e-6)"


@_check("6c", "yz <= 2 k4/k3 on all mesh points")
def _mesh_yz():
    pts = _mesh().points
    top = float(np.max(pts[:, 1] * pts[:, 2]))
    bound = 2 * CENTER_KAPPA.k4 / CENTER_KAPPA.k3
    return top <= bound + 1e-8, f"max yz {top:.6g} (bound {bound:g})"


@_check("6d", "tau_q -> 2 pi / sqrt(2 k2 k4) at q=0.01")
def _period_limit():
    tau = period(CENTER_KAPPA, 0.01)
    target = 2 * math.pi / CENTER_KAPPA.omega
    return abs(tau - target) <= 1e-3, f"tau={tau:.9g}, 2pi/omega={target:.9g}"


# --- 7 ----------------------------------------------------------------------

@_check("7", "vertical Hopf: contracting / expanding / neutral section amplitudes")
def _verticality():
    out = []
    ok = True
    for k1, expect in ((2.1, -1), (1.9, 1), (2.0, 0)):
        params = SystemParams.from_values([k1, 1.0, 1.0, 1.0])
        amps = section_amplitudes(params, near_equilibrium_start(params), 10)
        d = np.diff(amps)
        if expect < 0:
            good = len(amps) == 10 and np.all(d < 0)
        elif expect > 0:
            good = len(amps) == 10 and np.all(d > 0)
        else:
            good = len(amps) == 10 and np.max(np.abs(amps - amps[0])) <= 1e-6
        good &= amplitude_trend(amps) == expect
        ok &= bool(good)
        out.append(f"k1={k1}: trend {amplitude_trend(amps):+d}, amp {amps[0]:.4f}->{amps[-1]:.4f}")
    return ok, "; ".join(out)


# --- 8 ----------------------------------------------------------------------

def _fd5(fun, t, h):
    return (-fun(t + 2 * h) + 8 * fun(t + h) - 8 * fun(t - h) + fun(t - 2 * h)) / (12 * h)


@_check("8a", "closed-form facet solutions satisfy the facet ODE (FD residual)")
def _facet_residual():
    worst = 0.0
    for C in (-0.3, 0.0, 1.0):
        t0 = blowup_time(C) if C < 0 else -math.inf
        for tau in np.linspace(-5.0, 5.0, 1001):
            if tau <= t0:
                continue
            h = 1e-3 * min(1.0, (tau - t0) / 4)
            y_fd = _fd5(lambda t: facet_solution(C, t)[0], tau, h)
            z_fd = _fd5(lambda t: facet_solution(C, t)[1], tau, h)
            dy, dz = facet_rhs(*facet_solution(C, tau))
            worst = max(worst, abs(y_fd - dy) / (1 + abs(dy)), abs(z_fd - dz) / (1 + abs(dz)))
    return worst <= 1e-8, f"max residual {worst:.3g} (tol 1e-8)"


@_check("8b", "blowup_time(-0.5) = 0")
def _blowup():
    t0 = blowup_time(-0.5)
    return abs(t0) <= 1e-12, f"tau0={t0:.3g}"


@_check("8c", "boundary curve at tau=0")
def _curve_origin():
    pt = boundary_curve(CENTER_KAPPA, 0.0)
    scale = math.sqrt(2 * CENTER_KAPPA.k4 / CENTER_KAPPA.k3)
    want = scale * np.array([0.0, 2 * norm_pdf(0.0), 2 * norm_pdf(0.0)])
    err = float(np.max(np.abs(pt - want)))
    return err <= 1e-12, f"max error {err:.3g}"


@_check("8d", "yz on the boundary curve at tau=-8 within 1e-2 of 2 k4/k3")
def _curve_tail():
    pt = boundary_curve(CENTER_KAPPA, -8.0)
    target = 2 * CENTER_KAPPA.k4 / CENTER_KAPPA.k3
    yz = pt[1] * pt[2]
    return abs(yz - target) <= 1e-2, f"yz={yz:.6g}, limit {target:g}, gap {abs(yz - target):.3g}"


# --- 9 ----------------------------------------------------------------------

@_check("9a", "omega-limit: 20 random starts -> validated periodic orbits")
def _omega_periodic():
    rng = np.random.default_rng(909)
    bad = 0
    for s in rng.uniform(0.2, 3.0, size=(20, 3)):
        res = omega_limit(CENTER_KAPPA, s)
        if res.kind is not OmegaLimitKind.PERIODIC_ORBIT or not res.validated:
            bad += 1
    return bad == 0, f"{20 - bad}/20 validated"


@_check("9b", "omega-limit: stable-manifold starts -> equilibrium")
def _omega_equilibrium():
    xs = np.linspace(0.1, 0.9, 9)
    kinds = [omega_limit(CENTER_KAPPA, stable_manifold_point(CENTER_KAPPA, x)).kind
             for x in xs]
    n_eq = sum(k is OmegaLimitKind.EQUILIBRIUM for k in kinds)
    return n_eq == len(xs), f"{n_eq}/{len(xs)} classified Equilibrium"


# --- 10 ---------------------------------------------------------------------

def fuzz_network(rng: np.random.Generator) -> ReactionNetwork:
    """Random valid network with 1-5 species and 0-6 reactions."""
    n_species = int(rng.integers(1, 6))
    letters = list(string.ascii_uppercase)
    rng.shuffle(letters)
    species = [letters[i] + ("" if rng.random() < 0.7 else str(int(rng.integers(0, 10))))
               for i in range(n_species)]

    def complex_():
        k = int(rng.integers(0, min(3, n_species) + 1))
        names = rng.choice(species, size=k, replace=False) if k else []
        return Complex(tuple((str(s), int(rng.integers(1, 4))) for s in names))

    reactions = []
    for _ in range(int(rng.integers(0, 7))):
        a, b = complex_(), complex_()
        if a == b:
            continue
        reactions.append(Reaction(a, b, f"k{int(rng.integers(1, 9))}"))
    return ReactionNetwork(tuple(species), tuple(reactions))


def _simulate_csv(seed: int) -> bytes:
    from .export import fmt
    rng = np.random.default_rng(seed)
    y0 = rng.uniform(0.2, 3.0, size=3)
    traj = integrate(paper_field(CENTER_KAPPA), y0, (0.0, 20.0), _DRIFT_CFG)
    buf = io.StringIO()
    buf.write("t,x,y,z\n")
    for t, s in zip(traj.times, traj.states):
        buf.write(",".join(fmt(v) for v in (t, *s)) + "\n")
    return buf.getvalue().encode()


@_check("10a", "fixed seed -> byte-identical CSV output")
def _determinism():
    a, b = _simulate_csv(7), _simulate_csv(7)
    c = _simulate_csv(8)
    return a == b and a != c, f"{len(a)} bytes, identical={a == b}"


@_check("10b", "parse(print(net)) == net on builtins and 200 fuzzed networks")
def _round_trip():
    import warnings
    rng = np.random.default_rng(1010)
    nets = [builtin(n) for n in BUILTIN_NAMES] + [fuzz_network(rng) for _ in range(200)]
    failures = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for net in nets:
            if parse_network(pretty_print(net)) != net:
                failures += 1
    return failures == 0, f"{len(nets) - failures}/{len(nets)} round-trip"


def run_checks(ids=None) -> list[CheckResult]:
    ids = list(CHECKS) if ids is None else ids
    return [CHECKS[i]() for i in ids]
