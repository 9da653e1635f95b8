"""Equilibrium, Jacobian and Routh-Hurwitz classification of the four-reaction system.

The vector field is::

    x' = x (k1 z - k2 y)
    y' = y (k2 x - k3 z)
    z' = z (-k3 y - k1 x) + 2 k4
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .network import SystemParams

__all__ = [
    "CENTER_TOL",
    "StabilityClass",
    "EquilibriumReport",
    "paper_rhs",
    "paper_field",
    "positive_equilibrium",
    "jacobian",
    "numerical_jacobian",
    "charpoly_coefficients",
    "hurwitz_discriminant",
    "on_bifurcation_set",
    "classify_stability",
]

#: absolute band on k1 - k2 - k3 treated as the bifurcation set
CENTER_TOL = 1e-12


class StabilityClass(str, enum.Enum):
    STABLE = "Stable"
    CENTER = "Center"
    UNSTABLE = "Unstable"


def _kappa4(params: SystemParams) -> tuple[float, float, float, float]:
    try:
        k = (params.k1, params.k2, params.k3, params.k4)
    except KeyError as exc:
        raise ValueError(f"missing rate constant {exc.args[0]}") from None
    return k


def paper_rhs(params: SystemParams, state: Sequence[float]) -> np.ndarray:
    """Right-hand side of the four-reaction mass-action system, hand-coded."""
    k1, k2, k3, k4 = _kappa4(params)
    x, y, z = (float(v) for v in state)
    return np.array([
        x * (k1 * z - k2 * y),
        y * (k2 * x - k3 * z),
        z * (-k3 * y - k1 * x) + 2 * k4,
    ])


def paper_field(params: SystemParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """``f(t, state)`` closure over ``params`` for the integrators."""
    k1, k2, k3, k4 = _kappa4(params)
    two_k4 = 2 * k4

    def rhs(t, s):
        x, y, z = s
        return np.array([x * (k1 * z - k2 * y), y * (k2 * x - k3 * z), z * (-k3 * y - k1 * x) + two_k4])

    return rhs


def positive_equilibrium(params: SystemParams) -> np.ndarray:
    k1, k2, k3, k4 = _kappa4(params)
    return np.array([
        math.sqrt(k3 * k4 / (k1 * k2)),
        math.sqrt(k1 * k4 / (k2 * k3)),
        math.sqrt(k2 * k4 / (k1 * k3)),
    ])


def jacobian(params: SystemParams, state: Sequence[float]) -> np.ndarray:
    k1, k2, k3, _ = _kappa4(params)
    x, y, z = (float(v) for v in state)
    return np.array([
        [k1 * z - k2 * y, -k2 * x, k1 * x],
        [k2 * y, k2 * x - k3 * z, -k3 * y],
        [-k1 * z, -k3 * z, -k3 * y - k1 * x],
    ])


def numerical_jacobian(rhs: Callable[[np.ndarray], np.ndarray], state: Sequence[float],
                       rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``rhs`` (any network) at ``state``.

    The step for coordinate i is ``rel_step * (1 + |state_i|)``.
    """
    state = np.asarray(state, dtype=float)
    n = state.size
    cols = []
    for i in range(n):
        h = rel_step * (1.0 + abs(state[i]))
        e = np.zeros(n)
        e[i] = h
        cols.append((np.asarray(rhs(state + e)) - np.asarray(rhs(state - e))) / (2 * h))
    return np.column_stack(cols)


def charpoly_coefficients(params: SystemParams) -> tuple[float, float, float]:
    """Closed-form ``(a2, a1, a0)`` of ``det(lambda I - J)`` at the positive equilibrium."""
    k1, k2, k3, k4 = _kappa4(params)
    a2 = 2 * math.sqrt(k1 * k3 * k4 / k2)
    a1 = (k1 + k2 - k3) * k4
    a0 = 4 * math.sqrt(k1 * k2 * k3 * k4 ** 3)
    return a2, a1, a0


def hurwitz_discriminant(params: SystemParams) -> float:
    """``k1 - k2 - k3``; same sign as ``a2 a1 - a0``."""
    return params.k1 - params.k2 - params.k3


def on_bifurcation_set(params: SystemParams) -> SystemParams:
    """Copy of ``params`` with ``k1 := k2 + k3``."""
    return params.replace(k1=params.k2 + params.k3)


@dataclass(frozen=True)
class EquilibriumReport:
    kappa: tuple[float, float, float, float]
    point: np.ndarray
    charpoly: tuple[float, float, float]
    eigenvalues: np.ndarray
    stability: StabilityClass
    discriminant: float
    omega: float | None = None

    def to_dict(self) -> dict:
        a2, a1, a0 = self.charpoly
        out = {
            "kappa": list(self.kappa),
            "equilibrium": [float(v) for v in self.point],
            "charpoly": {"a2": a2, "a1": a1, "a0": a0},
            "eigenvalues": [{"re": float(e.real), "im": float(e.imag)} for e in self.eigenvalues],
            "class": self.stability.value,
            "discriminant": self.discriminant,
        }
        if self.omega is not None:
            out["omega"] = self.omega
        return out


def classify_stability(params: SystemParams, assume_center: bool = False) -> EquilibriumReport:
    """Routh-Hurwitz classification of the positive equilibrium.

    ``|k1 - k2 - k3| <= CENTER_TOL`` counts as the bifurcation set.  With
    ``assume_center`` the caller asserts equality: k1 is replaced by
    ``k2 + k3`` and the discriminant is taken to be exactly zero.
    """
    if assume_center:
        params = on_bifurcation_set(params)
    k = _kappa4(params)
    disc = 0.0 if assume_center else hurwitz_discriminant(params)
    point = positive_equilibrium(params)
    J = jacobian(params, point)
    eig = np.linalg.eigvals(J)
    # real root first, then the conjugate pair by descending imaginary part
    order = np.lexsort((-eig.imag, np.abs(eig.imag) > 1e-14 * (1 + np.abs(eig))))
    eig = eig[order]
    if abs(disc) <= CENTER_TOL:
        cls, omega = StabilityClass.CENTER, params.omega
    elif disc > 0:
        cls, omega = StabilityClass.STABLE, None
    else:
        cls, omega = StabilityClass.UNSTABLE, None
    return EquilibriumReport(
        kappa=k,
        point=point,
        charpoly=charpoly_coefficients(params),
        eigenvalues=eig,
        stability=cls,
        discriminant=disc,
        omega=omega,
    )
