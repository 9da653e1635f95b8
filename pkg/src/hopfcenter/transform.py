"""
Structures of the center case ``k1 = k2 + k3``.

The change of coordinates ``(p, q, r) = psi(x, y, z)`` splits the flow into a
planar Newtonian system in ``(p, q)`` with Hamiltonian ``H`` and a scalar
equation for ``r`` driven by it::

    p' = -2 k4 (e^q - 1)
    q' = k2 p
    r' = -k1 p + alpha (e^-r - e^(q + r))
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .analysis import on_bifurcation_set
from .network import SystemParams

__all__ = [
    "CenterPreconditionError",
    "TransformedState",
    "LevelSet",
    "require_center",
    "constant_of_motion_V",
    "grad_V",
    "V_minus_H",
    "psi",
    "psi_inverse",
    "psi_jacobian",
    "transformed_rhs",
    "transformed_field",
    "planar_field",
    "df3_dr",
    "hamiltonian",
    "level_set",
    "stable_manifold_point",
]

#: relative band on k1 - k2 - k3 accepted as the center case
CENTER_REL_TOL = 1e-12


class CenterPreconditionError(ValueError):
    """The operation needs ``k1 = k2 + k3``."""


class TransformedState(NamedTuple):
    p: float
    q: float
    r: float


@dataclass(frozen=True)
class LevelSet:
    """The two crossings of ``{H = L}`` with the axis ``p = 0``."""

    L: float
    q_plus: float
    q_minus: float


def require_center(params: SystemParams, assume_center: bool = False) -> SystemParams:
    """Return ``params`` if it lies on the bifurcation set.

    ``assume_center`` substitutes ``k1 := k2 + k3`` instead of checking.
    """
    if assume_center:
        return on_bifurcation_set(params)
    gap = params.k1 - params.k2 - params.k3
    if abs(gap) > CENTER_REL_TOL * params.k1:
        raise CenterPreconditionError(
            f"center case needs k1 = k2 + k3 (k1 - k2 - k3 = {gap:.3g}); pass assume_center to force it")
    return params


def constant_of_motion_V(params: SystemParams, state: Sequence[float]) -> float:
    params = require_center(params)
    x, y, z = (float(v) for v in state)
    if x <= 0 or y <= 0:
        raise ValueError(f"V needs x > 0 and y > 0, got {(x, y)}")
    k2, k4 = params.k2, params.k4
    s = x - y + z
    return 0.5 * k2 * s * s + 2 * k2 * x * y - 2 * k4 * math.log(x * y)


def grad_V(params: SystemParams, state: Sequence[float]) -> np.ndarray:
    x, y, z = (float(v) for v in state)
    k2, k4 = params.k2, params.k4
    s = x - y + z
    return np.array([k2 * s + 2 * k2 * y - 2 * k4 / x, -k2 * s + 2 * k2 * x - 2 * k4 / y, k2 * s])


def V_minus_H(params: SystemParams) -> float:
    """The additive constant ``V - H(psi_1, psi_2)``."""
    return 2 * params.k4 - 2 * params.k4 * math.log(params.k4 / params.k2)


def psi(params: SystemParams, state: Sequence[float]) -> TransformedState:
    """Map ``{x > 0, y > 0}`` onto ``R^3``; defined for every positive ``params``."""
    x, y, z = (float(v) for v in state)
    if x <= 0 or y <= 0:
        raise ValueError(f"psi is defined on x > 0, y > 0; got {(x, y)}")
    k1, k2, k3, k4 = params.k1, params.k2, params.k3, params.k4
    return TransformedState(
        x - y + z,
        math.log(x) + math.log(y) - math.log(k4 / k2),
        -math.log(x) + 0.5 * math.log(k3 * k4 / (k1 * k2)),
    )


def psi_inverse(params: SystemParams, t: Sequence[float]) -> np.ndarray:
    """Inverse of :func:`psi`.  The image is ``{x > 0, y > 0}``; z may be <= 0."""
    p, q, r = (float(v) for v in t)
    a = params.alpha
    x = a / params.k1 * math.exp(-r)
    y = a / params.k3 * math.exp(q + r)
    return np.array([x, y, p - x + y])


def psi_jacobian(params: SystemParams, state: Sequence[float]) -> np.ndarray:
    x, y, _ = (float(v) for v in state)
    return np.array([
        [1.0, -1.0, 1.0],
        [1.0 / x, 1.0 / y, 0.0],
        [-1.0 / x, 0.0, 0.0],
    ])


def transformed_rhs(params: SystemParams, t: Sequence[float]) -> np.ndarray:
    params = require_center(params)
    p, q, r = (float(v) for v in t)
    return np.array([
        -2 * params.k4 * math.expm1(q),
        params.k2 * p,
        -params.k1 * p + params.alpha * (math.exp(-r) - math.exp(q + r)),
    ])


def transformed_field(params: SystemParams):
    """``f(t, (p, q, r))`` for the integrators."""
    params = require_center(params)
    k1, k2, k4, a = params.k1, params.k2, params.k4, params.alpha
    exp, expm1 = math.exp, math.expm1

    def rhs(t, s):
        p, q, r = s
        return np.array([-2 * k4 * expm1(q), k2 * p, -k1 * p + a * (exp(-r) - exp(q + r))])

    return rhs


def planar_field(params: SystemParams):
    """``f(t, (p, q))``: the decoupled Hamiltonian subsystem."""
    k2, k4 = params.k2, params.k4
    expm1 = math.expm1

    def rhs(t, s):
        p, q = s
        return np.array([-2 * k4 * expm1(q), k2 * p])

    return rhs


def df3_dr(params: SystemParams, q: float, r: float) -> float:
    """Partial derivative of the r-equation in r; bounded above by ``-2 alpha e^(q/2)``."""
    return -params.alpha * (math.exp(-r) + math.exp(q + r))


def hamiltonian(params: SystemParams, p: float, q: float) -> float:
    # expm1(q) - q keeps full relative accuracy near the minimum
    return 0.5 * params.k2 * p * p + 2 * params.k4 * (math.expm1(q) - q)


def _g(q: float, c: float) -> float:
    return math.expm1(q) - q - c


def _polish(q: float, c: float) -> float:
    for _ in range(3):
        d = math.expm1(q)
        if d == 0.0:
            break
        step = _g(q, c) / d
        q_new = q - step
        if abs(_g(q_new, c)) >= abs(_g(q, c)):
            break
        q = q_new
    return q


def level_set(params: SystemParams, L: float) -> LevelSet:
    """Solve ``H(0, q) = L`` on both sides of the origin."""
    if not L > 0:
        raise ValueError(f"level must be positive, got {L}")
    c = L / (2 * params.k4)
    bound = max(10.0, L / params.k4 + 2.0)
    # g(2 log(1 + c) + 2) > 0 always, and it keeps exp() finite for large L
    upper = min(bound, 2.0 * math.log1p(c) + 2.0)
    eps = min(0.5 * math.sqrt(2 * c), 1e-3)
    rtol = 4 * np.finfo(float).eps
    q_minus = brentq(_g, -bound, -eps, args=(c,), xtol=1e-300, rtol=rtol, maxiter=500)
    q_plus = brentq(_g, eps, upper, args=(c,), xtol=1e-300, rtol=rtol, maxiter=500)
    return LevelSet(L=L, q_plus=_polish(q_plus, c), q_minus=_polish(q_minus, c))


def stable_manifold_point(params: SystemParams, x: float) -> np.ndarray:
    """Point of the stable manifold ``{x - y + z = 0, xy = k4/k2}`` with abscissa ``x``."""
    params = require_center(params)
    x_max = math.sqrt(params.k4 / params.k2)
    if not 0 < x <= x_max:
        raise ValueError(f"x must lie in (0, {x_max}], got {x}")
    y = params.k4 / (params.k2 * x)
    return np.array([x, y, y - x])
