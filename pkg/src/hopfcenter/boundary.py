"""
Dynamics on the boundary of the nonnegative orthant.

On the facet ``x = 0`` (after scaling ``y, z`` by ``sqrt(2 k4 / k3)`` and time
by ``sqrt(2 k3 k4)``) the system reduces to ``y' = -yz, z' = -yz + 1`` whose
solutions are, up to time shift,

    y = phi(tau) / (Phi(tau) + C),   z = y + tau,

with ``phi``/``Phi`` the standard normal density/distribution.  ``C = 0`` is
the only member that is complete inside the facet.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc, erfcx, ndtri

from .integrate import Trajectory
from .network import SystemParams
from .transform import require_center

__all__ = [
    "ZAxis",
    "Z_AXIS",
    "FamilyParam",
    "CompletenessClass",
    "BoundarySolution",
    "norm_pdf",
    "norm_cdf",
    "mills_ratio",
    "facet_rhs",
    "facet_solution",
    "blowup_time",
    "classify_facet_solution",
    "boundary_curve",
    "boundary_scale",
    "g2_rhs",
    "g2_linearity_check",
    "g2_exit_window",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class ZAxis(enum.Enum):
    """The limit ``C = infinity`` of the facet family: ``y = 0, z = tau``."""

    Z_AXIS = "inf"

    def __repr__(self):
        return "Z_AXIS"


Z_AXIS = ZAxis.Z_AXIS
FamilyParam = Union[float, ZAxis]


class CompletenessClass(str, enum.Enum):
    NOT_COMPLETE = "NotComplete"
    COMPLETE_IN_F = "CompleteInF"
    COMPLETE_IN_G1_ONLY = "CompleteInG1Only"
    Z_AXIS = "ZAxis"


def norm_pdf(tau):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(tau))


def norm_cdf(tau):
    """Standard normal CDF via ``erfc`` so the left tail keeps relative accuracy."""
    return 0.5 * erfc(-np.asarray(tau, dtype=float) / _SQRT2)


def mills_ratio(tau):
    """``phi(tau) / Phi(tau)`` without underflow in either tail."""
    return math.sqrt(2.0 / math.pi) / erfcx(-np.asarray(tau, dtype=float) / _SQRT2)


def _check_C(C: FamilyParam) -> None:
    if C is Z_AXIS:
        return
    if isinstance(C, ZAxis) or not isinstance(C, (int, float, np.floating)):
        raise TypeError(f"C must be a real number or Z_AXIS, got {C!r}")
    if math.isnan(C) or math.isinf(C):
        raise ValueError("use Z_AXIS for the C = infinity member, not a float sentinel")
    if C <= -1:
        raise ValueError(f"family parameter must satisfy C > -1, got {C}")


@dataclass(frozen=True)
class BoundarySolution:
    C: FamilyParam
    domain_start: float = -math.inf

    @classmethod
    def of(cls, C: FamilyParam) -> "BoundarySolution":
        _check_C(C)
        if C is not Z_AXIS and C < 0:
            return cls(C, blowup_time(C))
        return cls(C)

    @property
    def completeness(self) -> CompletenessClass:
        return classify_facet_solution(self.C)

    def __call__(self, tau):
        return facet_solution(self.C, tau)


def facet_rhs(y: float, z: float) -> tuple[float, float]:
    yz = y * z
    return -yz, -yz + 1.0


def facet_solution(C: FamilyParam, tau):
    """``(y, z)`` of the family member ``C`` at ``tau`` (scalar or array)."""
    _check_C(C)
    tau_arr = np.asarray(tau, dtype=float)
    if C is Z_AXIS:
        y = np.zeros_like(tau_arr)
    elif C == 0:
        y = mills_ratio(tau_arr)
    else:
        if C < 0:
            t0 = blowup_time(C)
            if np.any(tau_arr <= t0):
                raise ValueError(f"tau must exceed the blow-up time {t0} for C={C}")
        y = norm_pdf(tau_arr) / (norm_cdf(tau_arr) + C)
    z = y + tau_arr
    if np.ndim(tau) == 0:
        return float(y), float(z)
    return y, z


def blowup_time(C: float) -> float:
    """``tau_0`` with ``Phi(tau_0) + C = 0`` for ``-1 < C < 0``."""
    if not -1 < C < 0:
        raise ValueError(f"blow-up time exists only for -1 < C < 0, got {C}")
    guess = float(ndtri(-C))
    g = lambda t: float(norm_cdf(t)) + C
    lo, hi = guess - 1e-6 * (1 + abs(guess)), guess + 1e-6 * (1 + abs(guess))
    while g(lo) > 0:
        lo -= 2 * (hi - lo)
    while g(hi) < 0:
        hi += 2 * (hi - lo)
    if g(lo) == 0:
        return lo
    if g(hi) == 0:
        return hi
    return brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)


def classify_facet_solution(C: FamilyParam) -> CompletenessClass:
    _check_C(C)
    if C is Z_AXIS:
        return CompletenessClass.Z_AXIS
    if C < 0:
        return CompletenessClass.NOT_COMPLETE
    if C == 0:
        return CompletenessClass.COMPLETE_IN_F
    return CompletenessClass.COMPLETE_IN_G1_ONLY


def boundary_scale(params: SystemParams) -> tuple[float, float]:
    """``(length, time)`` factors: ``(y, z) = length * (Y, Z)`` and ``tau = time * t``."""
    return math.sqrt(2 * params.k4 / params.k3), math.sqrt(2 * params.k3 * params.k4)


def boundary_curve(params: SystemParams, tau):
    """Closure of the center manifold intersected with the orthant boundary.

    Returns shape ``(3,)`` for scalar ``tau`` and ``(n, 3)`` otherwise.
    """
    params = require_center(params)
    scale, _ = boundary_scale(params)
    y, z = facet_solution(0.0, tau)
    pts = scale * np.column_stack([np.zeros_like(np.atleast_1d(y)), np.atleast_1d(y), np.atleast_1d(z)])
    return pts[0] if np.ndim(tau) == 0 else pts


def g2_rhs(params: SystemParams):
    """Vector field on ``{y = 0}`` in ``(x, z)``."""
    k1, k4 = params.k1, params.k4

    def rhs(t, s):
        x, z = s
        return np.array([k1 * x * z, -k1 * x * z + 2 * k4])

    return rhs


def g2_linearity_check(params: SystemParams, traj: Trajectory) -> float:
    """``max |(x + z)(t) - (x + z)(0) - 2 k4 t|`` over a trajectory on ``{y = 0}``.

    Accepts ``(x, y, z)`` states (``y`` must vanish) or ``(x, z)`` states.
    """
    states = np.asarray(traj.states)
    if states.shape[1] == 3:
        if np.any(states[:, 1] != 0):
            raise ValueError("trajectory does not lie on the facet y = 0")
        xz = states[:, [0, 2]]
    else:
        xz = states
    s = xz.sum(axis=1)
    t = np.asarray(traj.times) - traj.times[0]
    return float(np.max(np.abs(s - s[0] - 2 * params.k4 * t)))


def g2_exit_window(params: SystemParams, state: Sequence[float]) -> tuple[float, float]:
    """Interval of past times in which ``z`` reaches zero on ``{y = 0}``.

    ``x + z`` grows at the constant rate ``2 k4``, so it vanishes at
    ``-(x + z) / (2 k4)`` and ``z <= 0`` there.  Going back from 0, ``x`` only
    shrinks while ``z > 0``, so ``z`` stays positive until ``-z / (2 k4)``.
    """
    x, _, z = (float(v) for v in state)
    return -(x + z) / (2 * params.k4), -z / (2 * params.k4)
