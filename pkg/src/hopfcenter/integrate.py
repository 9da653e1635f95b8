"""
Adaptive explicit Runge-Kutta integration with dense output and event location.

The stepper is the Dormand-Prince 5(4) pair (FSAL, local extrapolation) with
its free quartic continuous extension.  Everything here is forward in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Sequence

import numpy as np

__all__ = [
    "IntegratorConfig",
    "IntegrationError",
    "Event",
    "DenseOutput",
    "Trajectory",
    "integrate",
    "locate_event",
    "conserved_drift",
]

Direction = Literal["rising", "falling", "any"]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th- and embedded 4th-order weights, stages 1..7
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# quartic dense output: y(t0 + s h) = y0 + h K^T P [s, s^2, s^3, s^4]
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    max_time: float = 1e4
    positivity_guard: bool = False
    #: components that must stay strictly positive when the guard is on
    guard_indices: tuple[int, ...] = (0, 1)
    first_step: float | None = None
    max_steps: int = 2_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


class IntegrationError(RuntimeError):
    """Integration stopped early.  ``trajectory`` holds what was computed."""

    def __init__(self, message: str, trajectory: "Trajectory"):
        super().__init__(message)
        self.trajectory = trajectory

    @property
    def last_time(self) -> float:
        return float(self.trajectory.times[-1])

    @property
    def last_state(self) -> np.ndarray:
        return self.trajectory.states[-1]


@dataclass(frozen=True)
class Event:
    """Zero of ``g(t, y)`` to be recorded while integrating.

    ``where`` optionally filters crossings by state (e.g. ``q > 0`` on a
    section); ``terminal`` stops after the given number of accepted events.
    """

    g: Callable[[float, np.ndarray], float]
    direction: Direction = "any"
    label: str = "event"
    where: Callable[[float, np.ndarray], bool] | None = None
    terminal: int = 0


class DenseOutput:
    """Piecewise quartic interpolant over the accepted steps."""

    def __init__(self, t0s: np.ndarray, hs: np.ndarray, y0s: np.ndarray, qs: np.ndarray):
        self.t0s = t0s
        self.hs = hs
        self.y0s = y0s
        self.qs = qs  # shape (steps, n, 4)

    @property
    def t_span(self) -> tuple[float, float]:
        if len(self.t0s) == 0:
            return (math.nan, math.nan)
        return float(self.t0s[0]), float(self.t0s[-1] + self.hs[-1])

    def _segment(self, t: float) -> int:
        i = int(np.searchsorted(self.t0s, t, side="right")) - 1
        return min(max(i, 0), len(self.t0s) - 1)

    def eval_segment(self, i: int, t: float) -> np.ndarray:
        s = (t - self.t0s[i]) / self.hs[i]
        powers = np.array([s, s * s, s ** 3, s ** 4])
        return self.y0s[i] + self.hs[i] * (self.qs[i] @ powers)

    def __call__(self, t):
        lo, hi = self.t_span
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(ts < lo - 1e-12 * (1 + abs(lo))) or np.any(ts > hi + 1e-12 * (1 + abs(hi))):
            raise ValueError(f"time outside the integrated span [{lo}, {hi}]")
        out = np.array([self.eval_segment(self._segment(tk), tk) for tk in ts])
        return out[0] if scalar else out


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dense: DenseOutput
    events: list[tuple[float, str]] = field(default_factory=list)
    event_states: list[np.ndarray] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.states[-1]

    def resample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """``n`` equispaced samples over the span, endpoints included."""
        ts = np.linspace(self.times[0], self.times[-1], n)
        return ts, self.dense(ts)

    def event_times(self, label: str | None = None) -> np.ndarray:
        return np.array([t for t, lab in self.events if label is None or lab == label])


def _rms(v: np.ndarray) -> float:
    return math.sqrt(float(np.dot(v, v)) / v.size)


def _initial_step(f, t0, y0, f0, rtol, atol, max_step) -> float:
    scale = atol + rtol * np.abs(y0)
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    f1 = np.asarray(f(t0 + h0, y0 + h0 * f0), dtype=float)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, max_step)


def _sign_change(ga: float, gb: float, direction: Direction) -> bool:
    rising = ga < 0 <= gb
    falling = ga > 0 >= gb
    if direction == "rising":
        return rising
    if direction == "falling":
        return falling
    return rising or falling


def _refine_root(fun: Callable[[float], float], ta: float, tb: float, ga: float, gb: float,
                 width: float = 1e-14) -> float:
    """Bisection to ``width`` (relative to |t|) followed by one secant step."""
    while tb - ta > width * max(1.0, abs(ta)):
        tm = 0.5 * (ta + tb)
        if tm <= ta or tm >= tb:
            break
        gm = fun(tm)
        if gm == 0.0:
            return tm
        if (gm > 0) == (ga > 0):
            ta, ga = tm, gm
        else:
            tb, gb = tm, gm
    if gb == ga:
        return tb if abs(gb) < abs(ga) else ta
    ts = tb - gb * (tb - ta) / (gb - ga)
    if not ta <= ts <= tb:
        ts = tb if abs(gb) < abs(ga) else ta
    return ts


def integrate(rhs: Callable[[float, np.ndarray], np.ndarray], y0: Sequence[float],
              t_span: tuple[float, float], cfg: IntegratorConfig | None = None,
              events: Iterable[Event] = ()) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from ``t_span[0]`` to ``t_span[1]``.

    Raises :class:`IntegrationError` (carrying the partial trajectory) on
    step-size underflow, a positivity-guard failure, or exhausted step budget.
    """
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got {t_span}")
    if t1 - t0 > cfg.max_time:
        raise ValueError(f"span {t1 - t0} exceeds max_time {cfg.max_time}")
    events = list(events)
    y = np.array(y0, dtype=float)
    n = y.size
    f = np.asarray(rhs(t0, y), dtype=float)
    nfev = 1
    guard = list(cfg.guard_indices) if cfg.positivity_guard else []
    if guard and np.any(y[guard] <= 0):
        raise ValueError("positivity guard: initial state must be positive in the guarded components")

    h = cfg.first_step or _initial_step(rhs, t0, y, f, cfg.rtol, cfg.atol, cfg.max_step)
    nfev += 1
    t = t0
    times = [t0]
    states = [y.copy()]
    seg_t0, seg_h, seg_y0, seg_q = [], [], [], []
    ev_records: list[tuple[float, str]] = []
    ev_states: list[np.ndarray] = []
    ev_counts = [0] * len(events)
    g_prev = [float(ev.g(t, y)) for ev in events]
    n_acc = n_rej = 0
    K = np.empty((7, n))
    stop = False

    def partial(reason: str) -> IntegrationError:
        traj = _assemble(times, states, seg_t0, seg_h, seg_y0, seg_q, ev_records, ev_states,
                         n_acc, n_rej, nfev, reason)
        return IntegrationError(reason, traj)

    while t < t1 and not stop:
        if n_acc + n_rej >= cfg.max_steps:
            raise partial(f"step budget {cfg.max_steps} exhausted at t={t}")
        h = min(h, cfg.max_step)
        last = False
        if t + h >= t1 or t1 - (t + h) < 1e-12 * h:
            h = t1 - t
            last = True
        if h < 10 * np.finfo(float).eps * max(1.0, abs(t)):
            raise partial(f"step size underflow at t={t}")

        K[0] = f
        ok = True
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                for s in range(1, 6):
                    K[s] = rhs(t + _C[s] * h, y + h * (_A[s] @ K[:s]))
                y_new = y + h * (_B @ K[:6])
                f_new = np.asarray(rhs(t + h, y_new), dtype=float)
                K[6] = f_new
        except (OverflowError, ZeroDivisionError, ValueError):
            # trial stage left the domain of rhs; retry with a smaller step
            y_new = f_new = np.full(n, np.nan)
        nfev += 6
        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new))):
            ok = False
            err = math.inf
        else:
            scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _rms(h * (_E @ K) / scale)
        if guard and ok and np.any(y_new[guard] <= 0):
            ok = False

        if ok and err <= 1.0:
            seg_t0.append(t)
            seg_h.append(h)
            seg_y0.append(y.copy())
            Q = K.T @ _P
            seg_q.append(Q)
            t_new = t1 if last else t + h
            # events on this step, using the dense segment
            if events:
                i_seg = len(seg_t0) - 1
                hits = []
                for k, ev in enumerate(events):
                    g_new = float(ev.g(t_new, y_new))
                    if _sign_change(g_prev[k], g_new, ev.direction):
                        seg_eval = lambda tt, _i=i_seg: _dense_point(seg_t0[_i], seg_h[_i], seg_y0[_i], seg_q[_i], tt)
                        gfun = lambda tt, _ev=ev: float(_ev.g(tt, seg_eval(tt)))
                        te = _refine_root(gfun, t, t_new, g_prev[k], g_new)
                        ye = seg_eval(te)
                        if ev.where is None or ev.where(te, ye):
                            hits.append((te, k, ye))
                    g_prev[k] = g_new
                for te, k, ye in sorted(hits, key=lambda h_: h_[0]):
                    ev_records.append((te, events[k].label))
                    ev_states.append(ye)
                    ev_counts[k] += 1
                    if events[k].terminal and ev_counts[k] >= events[k].terminal:
                        stop = True
                        break
            t = t_new
            y = y_new
            f = f_new
            times.append(t)
            states.append(y.copy())
            n_acc += 1
            factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err ** -0.2)
            h = h * max(factor, 1.0)
        else:
            n_rej += 1
            factor = _MIN_FACTOR if not math.isfinite(err) or err == 0 else max(_MIN_FACTOR, _SAFETY * err ** -0.2)
            h = h * min(factor, 0.5 if not ok else 1.0)

    return _assemble(times, states, seg_t0, seg_h, seg_y0, seg_q, ev_records, ev_states,
                     n_acc, n_rej, nfev, "terminated by event" if stop else "ok")


def _dense_point(t0: float, h: float, y0: np.ndarray, Q: np.ndarray, t: float) -> np.ndarray:
    s = (t - t0) / h
    return y0 + h * (Q @ np.array([s, s * s, s ** 3, s ** 4]))


def _assemble(times, states, seg_t0, seg_h, seg_y0, seg_q, ev_records, ev_states,
              n_acc, n_rej, nfev, status) -> Trajectory:
    n = len(states[0])
    dense = DenseOutput(
        np.array(seg_t0),
        np.array(seg_h),
        np.array(seg_y0).reshape(-1, n),
        np.array(seg_q).reshape(-1, n, 4),
    )
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        dense=dense,
        events=list(ev_records),
        event_states=list(ev_states),
        stats={"accepted": n_acc, "rejected": n_rej, "rhs_evaluations": nfev, "status": status},
    )


def locate_event(traj: Trajectory, g: Callable[[float, np.ndarray], float],
                 direction: Direction = "any") -> list[tuple[float, np.ndarray]]:
    """Zeros of ``g`` along a finished trajectory, refined on the dense output."""
    out = []
    d = traj.dense
    g_vals = [float(g(t, y)) for t, y in zip(traj.times, traj.states)]
    for i in range(len(traj.times) - 1):
        ga, gb = g_vals[i], g_vals[i + 1]
        if not _sign_change(ga, gb, direction):
            continue
        ta, tb = float(traj.times[i]), float(traj.times[i + 1])
        fun = lambda tt, _i=i: float(g(tt, d.eval_segment(_i, tt)))
        te = _refine_root(fun, ta, tb, ga, gb)
        out.append((te, d.eval_segment(i, te)))
    return out


def conserved_drift(traj: Trajectory, fn: Callable[[np.ndarray], float],
                    dense_samples: int = 0) -> float:
    """``max |fn(y) - fn(y0)| / (1 + |fn(y0)|)`` over the accepted steps.

    With ``dense_samples > 0`` equispaced interpolated states are included too.
    """
    ref = float(fn(traj.states[0]))
    values = [float(fn(s)) for s in traj.states]
    if dense_samples:
        _, ys = traj.resample(dense_samples)
        values.extend(float(fn(s)) for s in ys)
    return max(abs(v - ref) for v in values) / (1.0 + abs(ref))
