"""Adaptive Dormand-Prince integration of the Lorenz flow with event location.

Integration runs in compiled chunks (:mod:`lorenz_lab._dopri`); after each
chunk the requested event functions are evaluated on the accepted step
endpoints, sign changes are bracketed, the root is located on the dense
interpolant and then polished against a genuine Runge-Kutta sub-step from
the start of the bracketing step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import _dopri
from .core import Params, as_state, vector_field
from .errors import NoEvent, StiffnessFailure

CHUNK_STEPS = 20000
GRAZING_RATE = 1e-8


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.05
    max_time: float = 100.0
    event_tol: float = 1e-12

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "max_time", "event_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"IntegratorConfig.{name} must be positive, got {value!r}")

    def tightened(self, factor=10.0):
        """Same config with both tolerances divided by ``factor``."""
        return IntegratorConfig(
            self.rel_tol / factor, self.abs_tol / factor, self.max_step, self.max_time, self.event_tol
        )

    def with_max_time(self, max_time):
        return IntegratorConfig(self.rel_tol, self.abs_tol, self.max_step, max_time, self.event_tol)


DEFAULT_CONFIG = IntegratorConfig()


class Trajectory:
    """Accepted steps of one integration plus their dense-output coefficients.

    ``t`` is the integration clock, strictly increasing from ``t[0]``. For a
    backward integration (``sense == -1``) physical time is ``-t``.
    """

    def __init__(self, params: Params, t, states, cont, sense=1):
        self.params = params
        self.t = np.asarray(t, dtype=float)
        self.states = np.asarray(states, dtype=float)
        self.cont = np.asarray(cont, dtype=float)
        self.sense = int(sense)
        for arr in (self.t, self.states, self.cont):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.t)

    def __repr__(self):
        return f"Trajectory(n={len(self.t)}, span=({self.t[0]:.6g}, {self.t[-1]:.6g}), sense={self.sense})"

    @property
    def span(self):
        return (float(self.t[0]), float(self.t[-1]))

    @property
    def physical_times(self):
        return self.sense * self.t

    @property
    def end(self):
        return self.states[-1].copy()

    def __call__(self, t):
        """Dense evaluation at a scalar time or an array of times."""
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = self.t[0], self.t[-1]
        if np.any(tq < lo - 1e-12 * max(1.0, abs(lo))) or np.any(tq > hi + 1e-12 * max(1.0, abs(hi))):
            raise ValueError(f"time outside trajectory span [{lo}, {hi}]")
        if len(self.t) == 1:
            out = np.repeat(self.states[:1], len(tq), axis=0)
        else:
            order = np.argsort(tq, kind="stable")
            vals = _dopri.dense_eval_many(self.cont, self.t, np.clip(tq[order], lo, hi))
            out = np.empty_like(vals)
            out[order] = vals
        return out[0] if np.ndim(t) == 0 else out

    def sample(self, per_step=1, max_turn=None, centers=None):
        """States at every step endpoint, subdividing each step ``per_step`` times.

        With ``max_turn`` and ``centers`` (an iterable of ``(cx, cy)``), steps are
        subdivided further until the horizontal angle about each center changes
        by at most ``max_turn`` turns between consecutive samples.
        """
        if len(self.t) == 1:
            return self.t.copy(), self.states.copy()
        n = max(1, int(per_step))
        if max_turn is not None and centers:
            sub = np.full(len(self.t) - 1, n, dtype=int)
            for cx, cy in centers:
                a = np.arctan2(self.states[:, 1] - cy, self.states[:, 0] - cx)
                d = np.abs(np.angle(np.exp(1j * np.diff(a)))) / (2 * np.pi)
                # factor 4 keeps the dense samples well inside the turn budget
                sub = np.maximum(sub, np.ceil(4.0 * d / max_turn).astype(int))
            pieces = [np.linspace(self.t[k], self.t[k + 1], sub[k], endpoint=False) for k in range(len(sub))]
            tq = np.concatenate(pieces + [self.t[-1:]])
        else:
            frac = np.arange(n) / n
            h = np.diff(self.t)
            tq = np.concatenate([(self.t[:-1, None] + h[:, None] * frac[None, :]).ravel(), self.t[-1:]])
        return tq, self(tq)

    def truncated(self, t_end, end_state=None):
        """Copy ending at ``t_end`` (inside the span).

        ``end_state`` replaces the interpolated final sample, e.g. with a
        polished event state.
        """
        k = int(np.searchsorted(self.t, t_end, side="left"))
        k = max(1, min(k, len(self.t) - 1))
        end_state = self(t_end) if end_state is None else np.asarray(end_state, dtype=float)
        h_full = self.t[k] - self.t[k - 1]
        h_new = t_end - self.t[k - 1]
        if h_new <= 0:
            return Trajectory(self.params, self.t[:k], self.states[:k], self.cont[: k - 1], self.sense)
        # rescale the last step's interpolant onto the shortened interval
        y0 = self.states[k - 1]
        theta_nodes = np.linspace(0.0, h_new / h_full, 5)
        vals = _dopri.dense_eval_many(self.cont, self.t, self.t[k - 1] + theta_nodes * h_full)
        coef = _fit_contd(y0, vals, end_state)
        t = np.concatenate([self.t[:k], [t_end]])
        states = np.vstack([self.states[:k], end_state])
        cont = np.concatenate([self.cont[: k - 1], coef[None]], axis=0)
        return Trajectory(self.params, t, states, cont, self.sense)

    def to_csv(self, path):
        write_csv(path, ["t", "x", "y", "z"], np.column_stack([self.physical_times, self.states]))

    @classmethod
    def concat(cls, parts: Sequence["Trajectory"]):
        parts = [p for p in parts if p is not None]
        first = parts[0]
        t = [first.t]
        s = [first.states]
        c = [first.cont]
        for part in parts[1:]:
            t.append(part.t[1:])
            s.append(part.states[1:])
            c.append(part.cont)
        return cls(first.params, np.concatenate(t), np.vstack(s), np.concatenate(c, axis=0), first.sense)


def _fit_contd(y0, vals, y1):
    """Coefficients of the DOPRI5 interpolant form matching 5 equispaced samples."""
    th = np.linspace(0.0, 1.0, 5)
    # basis: th, th(1-th), th^2(1-th), th^2(1-th)^2  (rcont2..rcont5)
    B = np.column_stack([th, th * (1 - th), th**2 * (1 - th), th**2 * (1 - th) ** 2])
    rhs_vals = vals - y0[None, :]
    rhs_vals[-1] = y1 - y0
    coef, *_ = np.linalg.lstsq(B, rhs_vals, rcond=None)
    return np.vstack([y0[None, :], coef])


def write_csv(path, header, rows):
    np.savetxt(path, np.asarray(rows, dtype=float), fmt="%.17g", delimiter=",", header=",".join(header), comments="")


@dataclass(frozen=True)
class EventSpec:
    """Scalar event ``fun(params, states) -> values`` evaluated on ``(n, 3)`` stacks.

    ``grad`` (same signature, returns ``(n, 3)``) enables exact crossing rates;
    ``accept(params, state) -> bool`` filters roots after location;
    ``scale(params, state) -> float`` sets the unit in which ``event_tol`` is read.
    """

    fun: Callable
    direction: str = "any"
    grad: Optional[Callable] = None
    accept: Optional[Callable] = None
    scale: Optional[Callable] = None
    name: str = "event"

    def __post_init__(self):
        if self.direction not in ("up", "down", "any"):
            raise ValueError("direction must be 'up', 'down' or 'any'")


class EventHit(NamedTuple):
    t: float
    state: np.ndarray
    event: str
    rate: float
    grazing: bool
    index: int = 0


def linear_event(coef, offset, direction="any", name="linear", accept=None):
    """Event ``coef . s - offset``."""
    coef = np.asarray(coef, dtype=float)
    return EventSpec(
        fun=lambda p, s: np.asarray(s) @ coef - offset,
        grad=lambda p, s: np.broadcast_to(coef, np.shape(s)),
        direction=direction,
        accept=accept,
        name=name,
    )


def ball_event(center, radius, name="ball"):
    """Down-crossing of ``|s - center|^2 - radius^2``: entering the ball."""
    center = np.asarray(center, dtype=float)
    r2 = float(radius) ** 2
    return EventSpec(
        fun=lambda p, s: np.sum((np.asarray(s) - center) ** 2, axis=-1) - r2,
        grad=lambda p, s: 2.0 * (np.asarray(s) - center),
        scale=lambda p, s: r2,
        direction="down",
        name=name,
    )


def _crossings(vals, direction):
    a, b = vals[:-1], vals[1:]
    up = (a < 0) & (b >= 0)
    down = (a > 0) & (b <= 0)
    if direction == "up":
        mask = up
    elif direction == "down":
        mask = down
    else:
        mask = up | down
    return np.nonzero(mask)[0]


def _locate(p, ev, ts, ys, cont, k, sense, event_tol):
    """Root of the event inside step ``k``; returns ``(t, state, rate)``."""
    sig = (p.sigma, p.rho, p.beta)

    def on_interp(t):
        return float(ev.fun(p, _dopri.dense_eval(cont, ts, k, t)[None, :])[0])

    t_lo, t_hi = ts[k], ts[k + 1]
    f_lo = float(ev.fun(p, ys[k : k + 1])[0])
    f_hi = float(ev.fun(p, ys[k + 1 : k + 2])[0])
    if f_lo == 0.0:
        t_star = t_lo
    elif f_hi == 0.0:
        t_star = t_hi
    else:
        t_star = brentq(on_interp, t_lo, t_hi, xtol=1e-15, rtol=1e-15, maxiter=200)

    y_k = ys[k]

    def on_step(t):
        if t <= t_lo:
            return f_lo
        return float(ev.fun(p, _dopri.single_step(*sig, float(sense), y_k, t - t_lo)[None, :])[0])

    # polish against a true RK sub-step (5th order) inside a narrow bracket
    width = 1e-6 * (t_hi - t_lo)
    a, b = max(t_lo, t_star - width), min(t_hi, t_star + width)
    fa, fb = on_step(a), on_step(b)
    if fa == 0.0:
        t_star = a
    elif fb == 0.0:
        t_star = b
    else:
        if np.sign(fa) == np.sign(fb):
            a, b = t_lo, t_hi
            fa, fb = f_lo, f_hi
        if np.sign(fa) != np.sign(fb):
            t_star = brentq(on_step, a, b, xtol=1e-16, rtol=1e-15, maxiter=200)
    state = y_k.copy() if t_star <= t_lo else _dopri.single_step(*sig, float(sense), y_k, t_star - t_lo)
    field_here = sense * vector_field(p, state)
    if ev.grad is not None:
        rate = float(np.asarray(ev.grad(p, state[None, :]))[0] @ field_here)
        value = float(ev.fun(p, state[None, :])[0])
        scale = 1.0 + (abs(ev.scale(p, state)) if ev.scale is not None else float(np.max(np.abs(state))))
        if abs(value) > event_tol * scale and rate != 0.0:
            # one Newton correction along the flow
            dt = -value / rate
            if abs(dt) < (t_hi - t_lo):
                t_star += dt
                state = _dopri.single_step(*sig, float(sense), y_k, t_star - t_lo)
    else:
        d = 1e-7 * (t_hi - t_lo)
        rate = (on_interp(min(t_hi, t_star + d)) - on_interp(max(t_lo, t_star - d))) / (
            min(t_hi, t_star + d) - max(t_lo, t_star - d)
        )
    return t_star, state, rate


def _march(p, s0, cfg, sense, t_end, events=(), t_min=0.0, record=True, stop=None):
    """Integrate until ``t_end`` or the first accepted event.

    Returns ``(trajectory_or_None, hit_or_None, final_t, final_state)``.
    ``stop(ts, ys) -> index or None`` allows an extra early termination at a
    step endpoint (used for capture tests that do not need root polishing).
    """
    s0 = as_state(s0)
    sig = (p.sigma, p.rho, p.beta)
    h = _dopri.initial_step(*sig, float(sense), s0, cfg.rel_tol, cfg.abs_tol, cfg.max_step)
    t = 0.0
    y = s0
    parts = []
    while True:
        n, ts, ys, cont, h, status = _dopri.run(
            *sig, float(sense), t, y, t_end, h, cfg.rel_tol, cfg.abs_tol, cfg.max_step, CHUNK_STEPS
        )
        if status in (_dopri.UNDERFLOW, _dopri.NONFINITE):
            raise StiffnessFailure(f"step size underflow at t={ts[-1]:.6g}, state={ys[-1]}")
        best = None
        for ev in events:
            vals = np.asarray(ev.fun(p, ys), dtype=float)
            for k in _crossings(vals, ev.direction):
                if best is not None and ts[k] > best.t:
                    break
                if ts[k + 1] <= t_min:
                    continue
                t_star, state, rate = _locate(p, ev, ts, ys, cont, k, sense, cfg.event_tol)
                if t_star <= t_min:
                    continue
                if ev.accept is not None and not ev.accept(p, state):
                    continue
                if best is None or t_star < best.t:
                    best = EventHit(t_star, state, ev.name, rate, abs(rate) < GRAZING_RATE, k)
                break
        cut = None
        if stop is not None:
            cut = stop(ts, ys)
            if cut is not None and best is not None and ts[cut] >= best.t:
                cut = None
        if best is not None and cut is None:
            traj = None
            if record:
                piece = Trajectory(p, ts, ys, cont, sense).truncated(best.t, best.state)
                traj = Trajectory.concat(parts + [piece])
            return traj, best, best.t, best.state
        if cut is not None:
            traj = None
            if record:
                piece = Trajectory(p, ts[: cut + 1], ys[: cut + 1], cont[:cut], sense)
                traj = Trajectory.concat(parts + [piece])
            return traj, None, float(ts[cut]), ys[cut].copy()
        if record:
            parts.append(Trajectory(p, ts, ys, cont, sense))
        t, y = float(ts[-1]), ys[-1].copy()
        if t >= t_end:
            traj = Trajectory.concat(parts) if record else None
            return traj, None, t, y


def integrate(p: Params, s0, t_span=(0.0, 1.0), cfg: IntegratorConfig = DEFAULT_CONFIG, sense=1):
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    traj, _, _, _ = _march(p, s0, cfg, sense, t1 - t0)
    if t0 != 0.0:
        traj = Trajectory(p, traj.t + t0, traj.states, traj.cont, sense)
    return traj


def flow_map(p: Params, s0, t, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Time-``t`` map; negative ``t`` integrates the negated field."""
    s0 = as_state(s0)
    t = float(t)
    if abs(t) > cfg.max_time:
        raise ValueError(f"|t|={abs(t)} exceeds max_time={cfg.max_time}")
    if t == 0.0:
        return s0.copy()
    _, _, _, y = _march(p, s0, cfg, 1 if t > 0 else -1, abs(t), record=False)
    return y


def advance_to_event(
    p: Params,
    s0,
    ev,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    *,
    sense=1,
    t_min=0.0,
    record=False,
):
    """First crossing in ``(t_min, max_time]`` of ``ev`` (an EventSpec or a list).

    Returns an :class:`EventHit`, or ``(EventHit, Trajectory)`` when ``record``.
    """
    events = list(ev) if isinstance(ev, (list, tuple)) else [ev]
    traj, hit, _, _ = _march(p, s0, cfg, sense, cfg.max_time, events, t_min=t_min, record=record)
    if hit is None:
        raise NoEvent(f"no event before max_time={cfg.max_time}")
    return (hit, traj) if record else hit


def volume_ratio(p: Params, s0, t, h=1e-4, cfg: IntegratorConfig = DEFAULT_CONFIG, *, method="octahedron", substeps=10):
    """Volume growth factor of a small body around ``s0`` under the time-``t`` flow.

    ``method="octahedron"`` uses vertices ``s0 +/- h e_i`` and measures the
    image by its three diagonals, ``|det(d1, d2, d3)| / (2h)^3``; the centered
    stencil cancels the curvature term. ``method="tetrahedron"`` uses the
    one-sided tetrahedron ``{s, s + h e_i}``, rebuilt at the image of ``s``
    after each of ``substeps`` equal sub-intervals so that it never becomes
    too flat to measure, and multiplies the per-interval ratios.
    """
    s0 = as_state(s0)
    if method == "octahedron":
        d = [flow_map(p, s0 + h * e, t, cfg) - flow_map(p, s0 - h * e, t, cfg) for e in np.eye(3)]
        return float(np.linalg.det(np.column_stack(d))) / (2.0 * h) ** 3
    if method != "tetrahedron":
        raise ValueError(f"method must be 'octahedron' or 'tetrahedron', got {method!r}")
    dt = t / int(substeps)
    s, ratio = s0, 1.0
    for _ in range(int(substeps)):
        c = flow_map(p, s, dt, cfg)
        d = [flow_map(p, s + h * e, dt, cfg) - c for e in np.eye(3)]
        ratio *= float(np.linalg.det(np.column_stack(d))) / h**3
        s = c
    return ratio
