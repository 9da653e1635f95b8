import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from hopfcenter.analysis import paper_field
from hopfcenter.integrate import (
    Event, IntegrationError, IntegratorConfig, conserved_drift, integrate, locate_event,
)
from hopfcenter.network import SystemParams, builtin, mass_action_field
from hopfcenter.transform import hamiltonian, planar_field, transformed_field

P = SystemParams.from_values([2.0, 1.0, 1.0, 1.0])


def oscillator(t, y):
    return np.array([-y[1], y[0]])


def test_harmonic_oscillator_closes():
    traj = integrate(oscillator, [0.0, 1.0], (0.0, 2 * math.pi))
    np.testing.assert_allclose(traj.y_final, [0.0, 1.0], atol=1e-8)
    # closed form everywhere along the dense output
    ts = np.linspace(0, 2 * math.pi, 997)
    exact = np.column_stack([-np.sin(ts), np.cos(ts)])
    assert np.max(np.abs(traj.dense(ts) - exact)) <= 1e-8


def test_dense_output_hits_nodes_and_has_order_four():
    traj = integrate(oscillator, [0.0, 1.0], (0.0, 10.0), IntegratorConfig(rtol=1e-6, atol=1e-9))
    assert np.all(np.diff(traj.times) > 0)
    np.testing.assert_allclose(traj.dense(traj.times), traj.states, atol=1e-12, rtol=0)
    # the interpolant error between nodes should scale like h^5: halve h via fixed steps
    errs = []
    for h in (0.2, 0.1):
        cfg = IntegratorConfig(rtol=1e3, atol=1e3, first_step=h, max_step=h)
        tr = integrate(oscillator, [0.0, 1.0], (0.0, 2.0), cfg)
        mids = tr.times[:-1] + 0.37 * np.diff(tr.times)
        ys = tr.dense(mids)
        # compare the interpolant to the exact flow from each step's start
        start = tr.states[:-1]
        dt = mids - tr.times[:-1]
        exact = np.column_stack([start[:, 0] * np.cos(dt) - start[:, 1] * np.sin(dt),
                                 start[:, 0] * np.sin(dt) + start[:, 1] * np.cos(dt)])
        errs.append(np.max(np.abs(ys - exact)))
    assert errs[0] / errs[1] > 2 ** 4.5


@pytest.mark.parametrize("name, kappa, y0", [
    ("paper4", [2.0, 1.0, 1.0, 1.0], [1.0, 1.0, 1.0]),
    ("paper4", [2.7, 0.8, 1.2, 0.5], [0.3, 2.0, 0.9]),
    ("lotka", [1.0, 1.0, 1.0], [0.5, 1.8]),
    ("ivanova", [1.0, 2.0, 1.5], [0.5, 1.0, 1.5]),
])
def test_matches_scipy_dop853(name, kappa, y0):
    net = builtin(name)
    params = SystemParams.from_values(kappa, net.rate_symbols)
    f = mass_action_field(net, params)
    traj = integrate(f, y0, (0.0, 10.0), IntegratorConfig(rtol=1e-11, atol=1e-13))
    ts = np.linspace(0, 10, 41)
    ref = solve_ivp(f, (0, 10), y0, method="DOP853", rtol=1e-13, atol=1e-15, t_eval=ts, dense_output=True)
    assert np.max(np.abs(traj.dense(ts) - ref.y.T)) <= 1e-8 * (1 + np.max(np.abs(ref.y)))


def test_paper_V_drift_default_config():
    from hopfcenter.transform import constant_of_motion_V
    traj = integrate(paper_field(P), [1.0, 1.0, 1.0], (0.0, 100.0))
    assert conserved_drift(traj, lambda s: constant_of_motion_V(P, s), dense_samples=500) <= 1e-6


def test_planar_orbit_returns():
    from hopfcenter.poincare import period
    q0 = 1.3
    tau = period(P, q0)
    traj = integrate(planar_field(P), [0.0, q0], (0.0, tau), IntegratorConfig(rtol=1e-12, atol=1e-14))
    np.testing.assert_allclose(traj.y_final, [0.0, q0], atol=1e-8)
    # the spatial system projects onto the same planar orbit for any r
    for r in (-1.0, 2.0):
        tr = integrate(transformed_field(P), [0.0, q0, r], (0.0, tau), IntegratorConfig(rtol=1e-12, atol=1e-14))
        np.testing.assert_allclose(tr.y_final[:2], [0.0, q0], atol=1e-8)


def test_tighter_tolerance_reduces_drift():
    H = lambda s: hamiltonian(P, s[0], s[1])
    drifts = []
    for tol in (1e-6, 1e-7, 1e-8):
        traj = integrate(planar_field(P), [0.0, 2.0], (0.0, 50.0), IntegratorConfig(rtol=tol, atol=tol))
        drifts.append(conserved_drift(traj, H))
    assert drifts[0] >= 2 * drifts[1] and drifts[1] >= 2 * drifts[2]


def test_ivanova_total_conserved_exactly():
    net = builtin("ivanova")
    f = mass_action_field(net, SystemParams.from_values([1.0, 2.0, 3.0]))
    traj = integrate(f, [0.2, 0.3, 0.5], (0.0, 100.0))
    assert conserved_drift(traj, lambda s: s.sum()) <= 1e-12


def test_constant_function_drift_zero():
    traj = integrate(oscillator, [0.0, 1.0], (0.0, 1.0))
    assert conserved_drift(traj, lambda s: 3.0) == 0.0


# --- events -----------------------------------------------------------------

def test_time_event():
    traj = integrate(oscillator, [0.0, 1.0], (0.0, 10.0), events=[Event(lambda t, y: t - 5, label="t5")])
    np.testing.assert_allclose(traj.event_times("t5"), [5.0], atol=1e-12)
    hits = locate_event(traj, lambda t, y: t - 5)
    assert len(hits) == 1 and abs(hits[0][0] - 5) <= 1e-12


def test_two_section_crossings_per_period():
    from hopfcenter.poincare import period
    q0 = 0.8
    tau = period(P, q0)
    traj = integrate(planar_field(P), [0.0, q0], (0.0, 3 * tau - 0.1))
    hits = locate_event(traj, lambda t, s: s[0], "any")
    # starts on p=0; in (0, 3 tau) the orbit crosses 5 more times
    assert len(hits) == 5
    qs = np.array([s[1] for _, s in hits])
    assert np.sum(qs > 0) == 2 and np.sum(qs < 0) == 3
    for _, s in hits:
        assert abs(s[0]) <= 1e-12 * (1 + abs(s[1]))


def test_falling_direction_filter_and_where():
    traj = integrate(oscillator, [0.0, 1.0], (0.0, 4 * math.pi),
                     events=[Event(lambda t, y: y[1], "falling", "down"),
                             Event(lambda t, y: y[1], "rising", "up"),
                             Event(lambda t, y: y[1], "any", "neg", where=lambda t, y: y[0] < 0)])
    np.testing.assert_allclose(traj.event_times("down"), [math.pi / 2, 5 * math.pi / 2], atol=1e-10)
    np.testing.assert_allclose(traj.event_times("up"), [3 * math.pi / 2, 7 * math.pi / 2], atol=1e-10)
    np.testing.assert_allclose(traj.event_times("neg"), [math.pi / 2, 5 * math.pi / 2], atol=1e-10)


def test_terminal_event_stops():
    traj = integrate(oscillator, [0.0, 1.0], (0.0, 100.0),
                     events=[Event(lambda t, y: y[1], "falling", terminal=2)])
    assert len(traj.events) == 2
    assert traj.t_final < 5 * math.pi / 2 + 1.0
    assert traj.stats["status"] == "terminated by event"


def test_event_times_insensitive_to_max_step():
    ev = [Event(lambda t, s: s[0] - s[1] + s[2], "falling")]
    a = integrate(paper_field(P), [1.0, 1.0, 1.0], (0.0, 30.0), events=ev).event_times()
    b = integrate(paper_field(P), [1.0, 1.0, 1.0], (0.0, 30.0), IntegratorConfig(max_step=0.05),
                  events=ev).event_times()
    assert len(a) == len(b) > 3
    assert np.max(np.abs(a - b)) <= 1e-9


def test_no_falling_z_events_near_boundary():
    # z' = 2 k4 > 0 on z = 0, so z never falls through zero
    traj = integrate(paper_field(P), [0.5, 3.0, 1e-6], (0.0, 20.0))
    assert locate_event(traj, lambda t, s: s[2], "falling") == []


# --- errors -----------------------------------------------------------------

def test_blowup_reports_partial_trajectory():
    # y' = y^2 from 1 blows up at t = 1
    with pytest.raises(IntegrationError) as info:
        integrate(lambda t, y: y * y, [1.0], (0.0, 2.0))
    assert 0.99 < info.value.last_time < 1.0
    assert info.value.last_state[0] > 1e3


def test_positivity_guard():
    cfg = IntegratorConfig(positivity_guard=True, guard_indices=(0,))
    with pytest.raises(IntegrationError):
        integrate(lambda t, y: np.array([-1.0]), [1.0], (0.0, 2.0), cfg)
    with pytest.raises(ValueError):
        integrate(lambda t, y: -y, [0.0], (0.0, 1.0), cfg)
    traj = integrate(lambda t, y: -y, [1.0], (0.0, 5.0), cfg)
    assert traj.y_final[0] == pytest.approx(math.exp(-5), rel=1e-9)


def test_bad_arguments():
    with pytest.raises(ValueError):
        integrate(oscillator, [0, 1], (1.0, 0.0))
    with pytest.raises(ValueError):
        IntegratorConfig(rtol=0)
    with pytest.raises(ValueError):
        integrate(oscillator, [0, 1], (0.0, 2e4))


def test_stats_and_resample():
    traj = integrate(oscillator, [0.0, 1.0], (0.0, 1.0))
    assert traj.stats["accepted"] == len(traj.times) - 1
    assert traj.stats["rhs_evaluations"] > 6 * traj.stats["accepted"]
    ts, ys = traj.resample(11)
    assert ts[0] == 0.0 and ts[-1] == 1.0 and ys.shape == (11, 2)
    with pytest.raises(ValueError):
        traj.dense(1.5)
