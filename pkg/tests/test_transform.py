import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from hopfcenter.analysis import paper_rhs, positive_equilibrium
from hopfcenter.network import SystemParams
from hopfcenter.transform import (
    CenterPreconditionError, V_minus_H, constant_of_motion_V, df3_dr, grad_V, hamiltonian, level_set,
    psi, psi_inverse, psi_jacobian, require_center, stable_manifold_point, transformed_rhs,
)

P = SystemParams.from_values([2.0, 1.0, 1.0, 1.0])


def center_params(k2, k3, k4):
    return SystemParams.from_values([k2 + k3, k2, k3, k4])


center_st = st.tuples(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.1, 5)).map(lambda t: center_params(*t))
pos = st.floats(0.05, 5.0)


# --- V ----------------------------------------------------------------------

def test_V_examples():
    assert constant_of_motion_V(P, positive_equilibrium(P)) == pytest.approx(2.0, abs=1e-15)
    assert constant_of_motion_V(P, [1, 1, 1]) == pytest.approx(2.5, abs=1e-15)


def test_V_requires_center_and_domain():
    with pytest.raises(CenterPreconditionError):
        constant_of_motion_V(P.replace(k1=2.5), [1, 1, 1])
    with pytest.raises(ValueError):
        constant_of_motion_V(P, [0, 1, 1])


@settings(max_examples=200, deadline=None)
@given(center_st, pos, pos, st.floats(-3, 5))
def test_V_minimised_on_stable_set(params, x, y, z):
    vmin = 2 * params.k4 - 2 * params.k4 * math.log(params.k4 / params.k2)
    assert constant_of_motion_V(params, [x, y, z]) >= vmin - 1e-12 * (1 + abs(vmin))
    xs = math.sqrt(params.k4 / params.k2) * 0.7
    s = stable_manifold_point(params, xs)
    assert constant_of_motion_V(params, s) == pytest.approx(vmin, rel=1e-12, abs=1e-12)


def test_V_derivative_along_flow_vanishes():
    rng = np.random.default_rng(21)
    for _ in range(1000):
        params = center_params(*rng.uniform(0.2, 3, 3))
        s = rng.uniform(0.05, 4, 3)
        dV = grad_V(params, s) @ paper_rhs(params, s)
        # cancellation is between terms of size |grad V| |f|
        scale = np.linalg.norm(grad_V(params, s)) * np.linalg.norm(paper_rhs(params, s))
        assert abs(dV) <= 1e-10 * (1 + abs(constant_of_motion_V(params, s))) + 1e-14 * scale


@settings(max_examples=200, deadline=None)
@given(center_st, pos, pos, st.floats(-3, 5))
def test_V_minus_H_is_constant(params, x, y, z):
    p, q, _ = psi(params, [x, y, z])
    V = constant_of_motion_V(params, [x, y, z])
    assert V - hamiltonian(params, p, q) == pytest.approx(V_minus_H(params), abs=1e-11 * (1 + abs(V)))


# --- psi --------------------------------------------------------------------

def test_psi_examples():
    np.testing.assert_allclose(psi(P, [1, 1, 1]), [1, 0, -0.5 * math.log(2)], atol=1e-16)
    np.testing.assert_allclose(psi_inverse(P, [0, 0, 0]), positive_equilibrium(P), rtol=1e-15)
    neg = psi_inverse(P, [-3, 0, 0])
    np.testing.assert_allclose(neg, [math.sqrt(0.5), math.sqrt(2), -3 - math.sqrt(0.5) + math.sqrt(2)], rtol=1e-15)
    assert neg[2] < 0


def test_psi_domain():
    with pytest.raises(ValueError):
        psi(P, [1, -1, 1])


@settings(max_examples=300, deadline=None)
@given(center_st, st.tuples(st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4)))
def test_psi_inverse_round_trip(params, t):
    s = psi_inverse(params, t)
    back = np.array(psi(params, s))
    # p = x - y + z cancels, so its error scales with the size of the state
    assert np.all(np.abs(back - t) <= 1e-12 * (1 + np.abs(t) + np.max(np.abs(s))))


@settings(max_examples=300, deadline=None)
@given(center_st, pos, pos, st.floats(-5, 5))
def test_inverse_psi_round_trip(params, x, y, z):
    s = np.array([x, y, z])
    assert np.all(np.abs(psi_inverse(params, psi(params, s)) - s) <= 1e-12 * (1 + np.abs(s)))


def test_equilibrium_maps_to_origin():
    params = center_params(0.7, 1.9, 2.2)
    np.testing.assert_allclose(psi(params, positive_equilibrium(params)), 0, atol=1e-15)


# symbolic chain rule: D(psi) f expressed in (p, q, r) simplifies to the transformed field
def _symbolic_pushforward():
    x, y, z, k2, k3, k4 = sp.symbols("x y z k2 k3 k4", positive=True)
    k1 = k2 + k3
    f = sp.Matrix([x * (k1 * z - k2 * y), y * (k2 * x - k3 * z), z * (-k3 * y - k1 * x) + 2 * k4])
    Psi = sp.Matrix([x - y + z, sp.log(x) + sp.log(y) - sp.log(k4 / k2),
                     -sp.log(x) + sp.log(k3 * k4 / (k1 * k2)) / 2])
    push = Psi.jacobian([x, y, z]) * f
    return sp.lambdify((x, y, z, k2, k3, k4), push, "numpy")


def test_pushforward_symbolic_oracle():
    push = _symbolic_pushforward()
    rng = np.random.default_rng(22)
    for _ in range(100):
        k2, k3, k4 = rng.uniform(0.2, 3, 3)
        params = center_params(k2, k3, k4)
        s = rng.uniform(0.1, 3, 3)
        lhs = np.asarray(push(*s, k2, k3, k4), dtype=float).ravel()
        rhs = transformed_rhs(params, psi(params, s))
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * (1 + np.linalg.norm(rhs))
        # the hand-coded Jacobian gives the same pushforward
        np.testing.assert_allclose(psi_jacobian(params, s) @ paper_rhs(params, s), lhs, rtol=1e-9, atol=1e-9)


def test_transformed_rhs_examples():
    np.testing.assert_allclose(transformed_rhs(P, [0, 0, 0]), 0, atol=1e-15)
    np.testing.assert_allclose(transformed_rhs(P, [1, 0, 0]), [0, 1, -2], atol=1e-15)
    with pytest.raises(CenterPreconditionError):
        transformed_rhs(P.replace(k1=3.0), [0, 0, 0])


@settings(max_examples=300, deadline=None)
@given(center_st, st.floats(-5, 5), st.floats(-5, 5))
def test_df3_dr_am_gm_bound(params, q, r):
    assert df3_dr(params, q, r) <= -2 * params.alpha * math.exp(q / 2) * (1 - 1e-14)


# --- H and level sets -------------------------------------------------------

def test_hamiltonian_examples():
    assert hamiltonian(P, 0, 0) == 0
    assert hamiltonian(P, 1, 0) == 0.5


@settings(max_examples=200, deadline=None)
@given(center_st, st.floats(-5, 5), st.floats(-5, 5))
def test_hamiltonian_conserved_by_planar_flow(params, p, q):
    assert hamiltonian(params, p, q) >= 0
    dp = -2 * params.k4 * math.expm1(q)
    dq = params.k2 * p
    dH = params.k2 * p * dp + 2 * params.k4 * math.expm1(q) * dq
    assert abs(dH) <= 1e-14 * (1 + abs(params.k2 * p * dp))


def _mp_roots(c):
    g = lambda q: mpmath.expm1(q) - q - c
    lo = -(c + 2)  # e^q - q - 1 > c below this
    with mpmath.workdps(40):
        return (float(mpmath.findroot(g, (mpmath.mpf(lo), mpmath.mpf(-1e-30)), solver="bisect")),
                float(mpmath.findroot(g, (mpmath.mpf(1e-30), mpmath.mpf(60)), solver="bisect")))


@pytest.mark.parametrize("L", [1e-10, 1e-4, 0.25, 1.0, 7.0, 100.0, 1e4])
def test_level_set_against_mpmath(L):
    params = SystemParams.from_values([2.0, 1.0, 1.0, 1.0])
    ls = level_set(params, L)
    qm, qp = _mp_roots(L / 2)
    assert ls.q_minus < 0 < ls.q_plus
    assert ls.q_minus == pytest.approx(qm, rel=1e-12)
    assert ls.q_plus == pytest.approx(qp, rel=1e-12)
    assert hamiltonian(params, 0, ls.q_plus) == pytest.approx(L, rel=1e-12)
    assert hamiltonian(params, 0, ls.q_minus) == pytest.approx(L, rel=1e-12)


def test_level_set_quarter():
    # roots of e^q - q - 1 = 1/8, frozen from a 40-digit bisection
    ls = level_set(P, 0.25)
    assert ls.q_minus == pytest.approx(-0.5453764666960421, rel=1e-13)
    assert ls.q_plus == pytest.approx(0.4615820454591966, rel=1e-13)


def test_level_set_shrinks_to_origin():
    ls = level_set(P, 1e-14)
    assert abs(ls.q_plus) < 1e-6 and abs(ls.q_minus) < 1e-6
    with pytest.raises(ValueError):
        level_set(P, 0.0)


# --- stable manifold --------------------------------------------------------

def test_stable_manifold_examples():
    np.testing.assert_allclose(stable_manifold_point(P, 0.5), [0.5, 2, 1.5])
    np.testing.assert_allclose(stable_manifold_point(P, 1.0), [1, 1, 0])
    with pytest.raises(ValueError):
        stable_manifold_point(P, 1.01)
    with pytest.raises(ValueError):
        stable_manifold_point(P, 0.0)


@settings(max_examples=100, deadline=None)
@given(center_st, st.floats(0.01, 1.0))
def test_stable_manifold_is_r_axis(params, frac):
    s = stable_manifold_point(params, frac * math.sqrt(params.k4 / params.k2))
    p, q, _ = psi(params, s) if s[2] >= 0 else (0, 0, 0)
    assert abs(p) <= 1e-12 * (1 + abs(s[1])) and abs(q) <= 1e-12


def test_require_center():
    assert require_center(P) is P
    with pytest.raises(CenterPreconditionError):
        require_center(P.replace(k1=2.001))
    forced = require_center(P.replace(k1=2.001), assume_center=True)
    assert forced.k1 == forced.k2 + forced.k3
