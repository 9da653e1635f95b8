import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from hopfcenter.analysis import (
    StabilityClass, charpoly_coefficients, classify_stability, hurwitz_discriminant, jacobian,
    numerical_jacobian, on_bifurcation_set, paper_rhs, positive_equilibrium,
)
from hopfcenter.network import SystemParams

kappa_st = st.lists(st.floats(0.05, 20.0), min_size=4, max_size=4).map(SystemParams.from_values)

# symbolic oracle for the vector field and its Jacobian
_x, _y, _z, _k1, _k2, _k3, _k4 = sp.symbols("x y z k1 k2 k3 k4", positive=True)
_F = sp.Matrix([_x * (_k1 * _z - _k2 * _y), _y * (_k2 * _x - _k3 * _z), _z * (-_k3 * _y - _k1 * _x) + 2 * _k4])
_J = sp.lambdify((_x, _y, _z, _k1, _k2, _k3, _k4), _F.jacobian([_x, _y, _z]), "numpy")


def K(*v):
    return SystemParams.from_values(v)


@pytest.mark.parametrize("kappa, expected", [
    ((2, 1, 1, 1), (math.sqrt(0.5), math.sqrt(2), math.sqrt(0.5))),
    ((1, 1, 1, 1), (1, 1, 1)),
    ((4, 1, 1, 4), (1, 4, 1)),
])
def test_equilibrium_examples(kappa, expected):
    eq = positive_equilibrium(K(*kappa))
    np.testing.assert_allclose(eq, expected, rtol=1e-15)
    assert np.linalg.norm(paper_rhs(K(*kappa), eq)) <= 1e-14 * (1 + np.linalg.norm(kappa))


@settings(max_examples=200, deadline=None)
@given(kappa_st)
def test_equilibrium_residual(params):
    eq = positive_equilibrium(params)
    k = params.vector(["k1", "k2", "k3", "k4"])
    # residual relative to the magnitude of the individual terms
    scale = max(1.0, float(np.max(np.abs(k))) * float(np.max(eq)) ** 2)
    assert np.all(eq > 0)
    assert np.linalg.norm(paper_rhs(params, eq)) <= 1e-14 * scale * (1 + np.linalg.norm(k))


def test_jacobian_hand_example():
    np.testing.assert_array_equal(jacobian(K(1, 1, 1, 1), [1, 1, 1]), [[0, -1, 1], [1, 0, -1], [-1, -1, -2]])


def test_jacobian_vanishes_at_origin():
    np.testing.assert_array_equal(jacobian(K(1.3, 2, 0.5, 7), [0, 0, 0]), np.zeros((3, 3)))


def test_jacobian_symbolic_and_fd():
    rng = np.random.default_rng(3)
    for _ in range(100):
        k = rng.uniform(0.1, 5, 4)
        s = rng.uniform(0.05, 4, 3)
        params = K(*k)
        J = jacobian(params, s)
        np.testing.assert_allclose(J, _J(*s, *k), rtol=1e-14, atol=1e-14)
        Jfd = numerical_jacobian(lambda u: paper_rhs(params, u), s)
        assert np.max(np.abs(J - Jfd)) <= 1e-6 * max(1.0, np.max(np.abs(J)))


@pytest.mark.parametrize("kappa, expected", [
    ((2, 1, 1, 1), (2 * math.sqrt(2), 2, 4 * math.sqrt(2))),
    ((1, 1, 1, 1), (2, 1, 4)),
])
def test_charpoly_examples(kappa, expected):
    np.testing.assert_allclose(charpoly_coefficients(K(*kappa)), expected, rtol=1e-15)


def test_charpoly_sign_example():
    a2, a1, a0 = charpoly_coefficients(K(3, 1, 1, 1))
    assert a2 * a1 - a0 == pytest.approx(2 * math.sqrt(3), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(kappa_st)
def test_charpoly_matches_determinant_expansion(params):
    J = jacobian(params, positive_equilibrium(params))
    coeffs = np.poly(J)  # det(lambda I - J), leading 1
    a = charpoly_coefficients(params)
    np.testing.assert_allclose(coeffs[1:], a, rtol=1e-10, atol=1e-10 * max(a))


@settings(max_examples=300, deadline=None)
@given(kappa_st)
def test_routh_hurwitz_sign_and_invariants(params):
    a2, a1, a0 = charpoly_coefficients(params)
    assert a0 > 0 and a2 > 0
    disc = params.k1 - params.k2 - params.k3
    if disc != 0:
        assert np.sign(a2 * a1 - a0) == np.sign(disc)
    rep = classify_stability(params)
    ev = rep.eigenvalues
    assert np.prod(ev).real == pytest.approx(-a0, rel=1e-9)
    assert np.sum(ev).real == pytest.approx(-a2, rel=1e-9)
    real = ev[np.abs(ev.imag) <= 1e-12 * np.abs(ev)]
    assert real.size >= 1 and np.min(real.real) < 0


@pytest.mark.parametrize("kappa, cls", [
    ((2.1, 1, 1, 1), StabilityClass.STABLE),
    ((3, 1, 1, 1), StabilityClass.STABLE),
    ((2, 1, 1, 1), StabilityClass.CENTER),
    ((1.9, 1, 1, 1), StabilityClass.UNSTABLE),
    ((1, 1, 1, 1), StabilityClass.UNSTABLE),
])
def test_classification_examples(kappa, cls):
    rep = classify_stability(K(*kappa))
    assert rep.stability is cls
    re_max = np.max(rep.eigenvalues.real)
    if cls is StabilityClass.STABLE:
        assert re_max < 0
    elif cls is StabilityClass.UNSTABLE:
        assert re_max > 0


def test_center_eigenvalues():
    rep = classify_stability(K(2, 1, 1, 1))
    assert rep.omega == pytest.approx(math.sqrt(2), rel=1e-15)
    ev = sorted(rep.eigenvalues, key=lambda c: (c.imag, c.real))
    assert ev[1].real == pytest.approx(-2 * math.sqrt(2), rel=1e-12)
    for c in (ev[0], ev[2]):
        assert abs(c.real) <= 1e-9
        assert abs(abs(c.imag) - math.sqrt(2)) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(kappa_st)
def test_bifurcation_set_pair_magnitude(params):
    centered = on_bifurcation_set(params)
    rep = classify_stability(centered)
    assert rep.stability is StabilityClass.CENTER
    pair = rep.eigenvalues[np.abs(rep.eigenvalues.imag) > 0]
    np.testing.assert_allclose(np.abs(pair.imag), math.sqrt(2 * params.k2 * params.k4), rtol=1e-9)


def test_center_tolerance_band_and_assume_center():
    base = K(2, 1, 1, 1)
    assert classify_stability(base.replace(k1=2 + 5e-13)).stability is StabilityClass.CENTER
    assert classify_stability(base.replace(k1=2 + 1e-9)).stability is StabilityClass.STABLE
    assert classify_stability(base.replace(k1=2 + 1e-9), assume_center=True).stability is StabilityClass.CENTER
    assert hurwitz_discriminant(base) == 0


def test_report_schema():
    doc = classify_stability(K(2, 1, 1, 1)).to_dict()
    assert set(doc) >= {"kappa", "equilibrium", "charpoly", "eigenvalues", "class", "omega"}
    assert set(doc["charpoly"]) == {"a2", "a1", "a0"}
    assert "omega" not in classify_stability(K(3, 1, 1, 1)).to_dict()
