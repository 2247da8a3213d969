"""One-dimensional invariant manifolds, kneading sequences and winding counts.

The separatrix is the unstable manifold of the origin; its half ``gamma+``
leaves toward positive ``x``. The wing centers ``p+-`` carry a
one-dimensional stable manifold whenever their Jacobian has a single real
negative eigenvalue, which is computed here by backward integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .core import Params, eigen_at, fixed_points, in_domain_A, jacobian, symmetry_map
from .errors import EigenStructureUnexpected, TooCloseToAxis, WindingNotInteger
from .integrator import DEFAULT_CONFIG, EventSpec, IntegratorConfig, Trajectory, _march, ball_event
from .section import (
    BOUNDARY,
    PARABOLOID,
    PLANE,
    Section,
    classify_crossing,
    ellipsoid_value,
    paraboloid_normal,
    paraboloid_value,
)

CAPTURE_FACTOR = 1e-4
OFFSET_FACTOR = 1e-7
WINDING_TOL = 0.05


@dataclass
class ManifoldBranch:
    base_point: np.ndarray
    direction: np.ndarray
    offset: float
    time_sense: int
    trajectory: Trajectory
    terminal: str = "max_time"
    terminal_time: float = math.nan
    section_hits: int = 0

    @property
    def seed(self):
        return self.base_point + self.offset * self.direction


@dataclass
class SymbolSequence:
    symbols: List[str]
    times: List[float]
    terminal: str = "max_time"
    undecided: bool = False
    points: List[np.ndarray] = field(default_factory=list)
    params: Optional[Params] = None

    @property
    def word(self):
        return "".join("?" if s == BOUNDARY else s for s in self.symbols)

    def swapped(self):
        table = {"A": "B", "B": "A"}
        term = {"p+": "p-", "p-": "p+"}.get(self.terminal, self.terminal)
        return replace(
            self,
            symbols=[table.get(s, s) for s in self.symbols],
            terminal=term,
            points=[symmetry_map(q) for q in self.points],
        )

    def to_record(self):
        p = self.params
        return {
            "params": None if p is None else {"sigma": p.sigma, "rho": p.rho, "beta": p.beta},
            "symbols": self.word,
            "times": [float(t) for t in self.times],
            "terminal": self.terminal,
            "undecided": self.undecided,
        }


@dataclass(frozen=True)
class WindingCount:
    n_plus: int
    n_minus: int
    raw_plus: float
    raw_minus: float

    def swapped(self):
        return WindingCount(self.n_minus, self.n_plus, self.raw_minus, self.raw_plus)


def base_scale(p: Params, base):
    return max(float(np.linalg.norm(base)), p.x0)


def capture_radius(p: Params):
    return CAPTURE_FACTOR * p.x0


def unstable_direction(p: Params):
    """Unit unstable eigenvector of the origin with positive x component."""
    eig = eigen_at(p, np.zeros(3))
    pos = eig.real_positive()
    if len(pos) != 1:
        raise EigenStructureUnexpected(f"origin has {len(pos)} real positive eigenvalues")
    v = eig.vectors[pos[0]].real
    v = v / np.linalg.norm(v)
    return v if v[0] > 0 else -v


def stable_direction(p: Params, wing="plus"):
    """Unit real stable eigenvector at ``p+`` (x component > 0), mirrored for ``p-``."""
    fps = fixed_points(p)
    eig = eigen_at(p, fps.p_plus)
    neg = eig.real_negative()
    if len(neg) != 1:
        raise EigenStructureUnexpected(
            f"wing center has {len(neg)} real negative eigenvalues: {eig.values}"
        )
    v = eig.vectors[neg[0]].real
    v = v / np.linalg.norm(v)
    if v[0] < 0:
        v = -v
    return v if wing == "plus" else symmetry_map(v)


def _side_sign(side):
    if side in ("plus", "+", 1):
        return 1.0
    if side in ("minus", "-", -1):
        return -1.0
    raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")


def _capture_events(p: Params, include_origin=True):
    fps = fixed_points(p)
    r = capture_radius(p)
    evs = [ball_event(fps.p_plus, r, "p+"), ball_event(fps.p_minus, r, "p-")]
    if include_origin:
        evs.append(ball_event(fps.origin, r, "origin"))
    return evs


def separatrix(p: Params, side="plus", cfg: IntegratorConfig = DEFAULT_CONFIG, *, offset=None):
    """Integrate one half of the unstable manifold of the origin.

    Stops at ``cfg.max_time`` or on entering the capture ball of a wing
    center, or of the origin after having left it.
    """
    if p.rho <= 1.0:
        raise EigenStructureUnexpected("rho <= 1: the origin has no unstable direction")
    u = unstable_direction(p)
    origin = np.zeros(3)
    if offset is None:
        offset = OFFSET_FACTOR * base_scale(p, origin)
    direction = _side_sign(side) * u
    traj, hit, t_end, _ = _march(p, origin + offset * direction, cfg, 1, cfg.max_time, _capture_events(p))
    terminal = "max_time" if hit is None else hit.event
    return ManifoldBranch(origin, direction, offset, 1, traj, terminal, t_end)


def _reversed_section_events(sec: Section):
    flipped = []
    for ev in sec.events():
        direction = {"up": "down", "down": "up"}.get(ev.direction, ev.direction)
        flipped.append(replace(ev, direction=direction))
    return flipped


def stable_branch(
    p: Params,
    wing="plus",
    side=1,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    *,
    sec: Optional[Section] = None,
    offset=None,
    radius=None,
):
    """Backward integration of one half of the 1D stable manifold of a wing center.

    ``side=1`` follows the eigenvector with positive x component at ``p+``
    (and its mirror image at ``p-``); ``side=2`` the opposite half. The branch
    is followed until it leaves the ellipsoid of ``radius`` (terminal
    ``'escaped'``) or ``max_time``; section crossings on the way are counted
    in ``section_hits``.
    """
    fps = fixed_points(p)
    base = fps.p_plus if wing == "plus" else fps.p_minus
    if side not in (1, 2):
        raise ValueError("side must be 1 or 2")
    v = stable_direction(p, wing)
    direction = v if side == 1 else -v
    if offset is None:
        offset = OFFSET_FACTOR * base_scale(p, base)
    if radius is None:
        radius = sec.spec.ellipsoid_radius if sec is not None else 1000.0
    r2 = float(radius) ** 2
    escape = EventSpec(
        fun=lambda _p, s: ellipsoid_value(p, s) - r2,
        direction="up",
        name="escaped",
    )
    events = [escape]
    if sec is not None:
        events += _reversed_section_events(sec)
    seed = base + offset * direction
    parts = []
    hits = 0
    t_total = 0.0
    s = seed
    terminal = "max_time"
    while t_total < cfg.max_time:
        traj, hit, t_loc, s_end = _march(
            p, s, cfg, -1, cfg.max_time - t_total, events, t_min=1e-6 if parts else 0.0
        )
        parts.append(traj)
        t_total += t_loc
        s = s_end
        if hit is None:
            break
        if hit.event == "escaped":
            terminal = "escaped"
            break
        hits += 1
    full = _join(parts, p, -1)
    return ManifoldBranch(base, direction, offset, -1, full, terminal, t_total, hits)


def _join(parts, p, sense):
    """Concatenate trajectories integrated back to back (each restarting at t=0)."""
    out = []
    shift = 0.0
    for part in parts:
        if part is None:
            continue
        out.append(Trajectory(p, part.t + shift, part.states, part.cont, sense))
        shift += part.t[-1]
    return Trajectory.concat(out)


def kneading_sequence(
    p: Params,
    sec: Section,
    n=10,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    *,
    side="plus",
    offset=None,
    record=False,
    capture_origin=True,
):
    """Symbols of the first ``n`` section crossings of a separatrix half.

    Stops early on capture by a wing center or the origin (``terminal``), at
    ``max_time``, or at a Boundary symbol (``undecided``). With ``record``
    the separatrix trajectory is returned as well. ``capture_origin=False``
    lets the separatrix pass close to the origin and continue, which is what
    the homoclinic searches need.
    """
    if not in_domain_A(p):
        raise ValueError("kneading_sequence needs parameters in domain A")
    u = unstable_direction(p)
    if offset is None:
        offset = OFFSET_FACTOR * base_scale(p, np.zeros(3))
    s = _side_sign(side) * offset * u
    captures = _capture_events(p, include_origin=capture_origin)
    seq = SymbolSequence([], [], params=p)
    parts = []
    t_total = 0.0
    while len(seq.symbols) < n and t_total < cfg.max_time:
        events = sec.events() + captures
        traj, hit, t_loc, s_end = _march(
            p, s, cfg, 1, cfg.max_time - t_total, events, t_min=1e-6 if parts else 0.0, record=record
        )
        parts.append(traj)
        t_total += t_loc
        if hit is None:
            seq.terminal = "max_time"
            break
        if hit.event in ("p+", "p-", "origin"):
            seq.terminal = hit.event
            break
        pt = classify_crossing(sec, hit.state, t_total, tol=1e-8, allow_grazing=True)
        seq.symbols.append(pt.symbol)
        seq.times.append(t_total)
        seq.points.append(pt.state)
        if pt.symbol == BOUNDARY:
            seq.undecided = True
            seq.terminal = "boundary"
            break
        s = hit.state
    else:
        if len(seq.symbols) >= n:
            seq.terminal = "length"
    if record:
        return seq, _join(parts, p, 1)
    return seq


def winding_numbers(traj, p: Params, *, close=True, check=True, max_turn=0.25):
    """Turns of a trajectory about the vertical axes through ``p+`` and ``p-``.

    Angles are accumulated from dense samples spaced so that no sample pair
    turns by more than ``max_turn / 4``. With ``close`` the straight chord
    from the last sample back to the first is added. Counts are positive in
    the sense the flow rotates about the wing centers (clockwise seen from
    above). ``traj`` may be a :class:`Trajectory` or an ``(n, 3)`` array.
    """
    x0 = p.x0
    centers = [(x0, x0), (-x0, -x0)]
    if isinstance(traj, Trajectory):
        _, pts = traj.sample(per_step=2, max_turn=max_turn, centers=centers)
    else:
        pts = np.asarray(traj, dtype=float)
    raw = []
    for cx, cy in centers:
        dx, dy = pts[:, 0] - cx, pts[:, 1] - cy
        if np.min(np.hypot(dx, dy)) < 1e-6:
            raise TooCloseToAxis(f"trajectory passes within 1e-6 of the axis through ({cx:.6g}, {cy:.6g})")
        ang = np.arctan2(dy, dx)
        steps = np.angle(np.exp(1j * np.diff(ang)))
        if np.max(np.abs(steps), initial=0.0) > 2 * np.pi * max_turn:
            raise TooCloseToAxis("angular resolution exceeded; trajectory passes too close to an axis")
        total = np.sum(steps)
        if close:
            total += np.angle(np.exp(1j * (ang[0] - ang[-1])))
        # clockwise (the rotation sense of the flow about the wing centers) counts positive
        raw.append(-total / (2 * np.pi))
    n = [int(round(r)) for r in raw]
    if check:
        for r, k in zip(raw, n):
            if abs(r - k) > WINDING_TOL:
                raise WindingNotInteger(f"raw winding {r:.4f} is not within {WINDING_TOL} of an integer")
    return WindingCount(n[0], n[1], raw[0], raw[1])


def first_lobe(p: Params, s, cfg: IntegratorConfig = DEFAULT_CONFIG, max_time=50.0):
    """+1 or -1 for the sign of x when the orbit of ``s`` first climbs to z = (rho-1)/2.

    0 when it does not climb within ``max_time`` (e.g. it lies on the stable
    manifold of the origin).
    """
    level = 0.5 * (p.rho - 1.0)
    climb = EventSpec(fun=lambda _p, q: np.asarray(q)[:, 2] - level, direction="up", name="climb")
    _, hit, _, _ = _march(p, s, cfg.with_max_time(max_time), 1, max_time, [climb], record=False)
    if hit is None:
        return 0
    return 1 if hit.state[0] > 0 else -1


def lobe_sequence(p: Params, n=4, cfg: IntegratorConfig = DEFAULT_CONFIG, *, side="plus", offset=None, record=False):
    """Wing visited by each of the first ``n`` loops of a separatrix half.

    A loop is an upward crossing of ``z = (rho-1)/2``; its sign is the sign of
    x there. Unlike section symbols this coding changes exactly when the
    separatrix passes through the stable manifold of the origin. Returns
    ``(signs, times, terminal)`` (plus the trajectory with ``record``); a
    wing capture ends the list with ``terminal`` set to ``"p+"``/``"p-"``.
    """
    u = unstable_direction(p)
    if offset is None:
        offset = OFFSET_FACTOR * base_scale(p, np.zeros(3))
    s = _side_sign(side) * offset * u
    level = 0.5 * (p.rho - 1.0)
    climb = EventSpec(fun=lambda _p, q: np.asarray(q)[:, 2] - level, direction="up", name="climb")
    events = [climb] + _capture_events(p, include_origin=False)
    signs, times, parts = [], [], []
    terminal = "length"
    t_total = 0.0
    while len(signs) < n:
        if t_total >= cfg.max_time:
            terminal = "max_time"
            break
        traj, hit, t_loc, s = _march(
            p, s, cfg, 1, cfg.max_time - t_total, events, t_min=1e-6 if parts else 0.0, record=record
        )
        parts.append(traj)
        t_total += t_loc
        if hit is None:
            terminal = "max_time"
            break
        if hit.event != "climb":
            terminal = hit.event
            break
        signs.append(1 if hit.state[0] > 0 else -1)
        times.append(t_total)
    if record:
        return signs, times, terminal, _join(parts, p, 1)
    return signs, times, terminal


def stable_trace(p: Params, sec: Section, cfg: IntegratorConfig = DEFAULT_CONFIG, *, extent=None, n=41, tol=1e-9):
    """Polyline of the stable manifold of the origin on the plane part of the section.

    Near the origin the trace is the line through the z axis along the strong
    stable direction of the (x, y) block; it is followed out to ``extent``
    (default ``3 x0``) in both directions, each vertex found by bisection on
    :func:`first_lobe` along the normal of that line. The polyline is
    oriented so that the A side (orbits climbing the x > 0 lobe first) lies
    on its right.
    """
    eps = sec.spec.epsilon
    if extent is None:
        extent = 3.0 * p.x0
    lam = -0.5 * ((p.sigma + 1.0) + math.sqrt((p.sigma - 1.0) ** 2 + 4.0 * p.sigma * p.rho))
    d = np.array([p.sigma, lam + p.sigma])
    d /= np.linalg.norm(d)
    nrm = np.array([-d[1], d[0]])
    if first_lobe(p, np.array([*(nrm * 1e-3), eps]), cfg) < 0:
        nrm = -nrm

    def lobe(q):
        return first_lobe(p, np.array([q[0], q[1], eps]), cfg)

    def vertex(t, guess):
        base = t * d
        width = 1e-3 * p.x0
        for _ in range(40):
            lo, hi = guess - width, guess + width
            if lobe(base + lo * nrm) < 0 < lobe(base + hi * nrm):
                break
            width *= 2.0
        else:
            return None
        while hi - lo > tol * max(1.0, abs(t)):
            mid = 0.5 * (lo + hi)
            side = lobe(base + mid * nrm)
            if side > 0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    ts = np.linspace(0.0, extent, (n + 1) // 2)
    branches = []
    for sgn in (1.0, -1.0):
        offs = [0.0]
        for t in ts[1:]:
            guess = offs[-1] if len(offs) < 2 else 2 * offs[-1] - offs[-2]
            off = vertex(sgn * t, guess)
            if off is None:
                break
            q = sgn * t * d + off * nrm
            if q[0] * q[1] >= p.beta * eps or not sec.inside_ellipsoid(np.array([q[0], q[1], eps])):
                break
            offs.append(off)
        branches.append(np.array([sgn * t * d + o * nrm for t, o in zip(ts, offs)]))
    poly = np.vstack([branches[1][::-1], branches[0][1:]])
    # orient so the A side is on the right of the direction of travel
    from .section import _signed_side

    probe = 1e-3 * p.x0 * nrm
    if _signed_side(poly, probe) < 0:
        poly = poly[::-1]
    return poly
