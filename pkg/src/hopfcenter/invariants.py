"""Known first integrals of the builtin networks."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .network import SystemParams

__all__ = ["lotka_integral", "ivanova_integral", "symmetric9_integral", "ivanova_total",
           "first_integrals"]


def lotka_integral(params: SystemParams) -> Callable[[np.ndarray], float]:
    k1, k2, k3 = params["k1"], params["k2"], params["k3"]
    return lambda s: s[0] ** k3 * s[1] ** k1 * math.exp(-k2 * (s[0] + s[1]))


def ivanova_integral(params: SystemParams) -> Callable[[np.ndarray], float]:
    k1, k2, k3 = params["k1"], params["k2"], params["k3"]
    return lambda s: s[0] ** k3 * s[1] ** k1 * s[2] ** k2


def ivanova_total(s) -> float:
    return float(s[0] + s[1] + s[2])


def symmetric9_integral(params: SystemParams) -> Callable[[np.ndarray], float]:
    """``xyz / (x + y + z)^3``; conserved only when ``alpha = 2 beta``."""
    if not math.isclose(params["alpha"], 2 * params["beta"], rel_tol=1e-12):
        raise ValueError("xyz/(x+y+z)^3 is conserved only for alpha = 2 beta")
    return lambda s: s[0] * s[1] * s[2] / (s[0] + s[1] + s[2]) ** 3


def first_integrals(name: str, params: SystemParams) -> dict[str, Callable[[np.ndarray], float]]:
    """Named conserved quantities of builtin ``name`` at ``params`` (may be empty)."""
    from .transform import constant_of_motion_V, require_center

    if name == "lotka":
        return {"lotka_integral": lotka_integral(params)}
    if name == "ivanova":
        return {"ivanova_integral": ivanova_integral(params), "total": ivanova_total}
    if name == "symmetric9":
        try:
            return {"xyz_over_sum_cubed": symmetric9_integral(params)}
        except ValueError:
            return {}
    if name == "paper4":
        try:
            centered = require_center(params)
        except ValueError:
            return {}
        return {"V": lambda s: constant_of_motion_V(centered, s)}
    return {}
