"""Homoclinic and heteroclinic connection searches.

Homoclinic orbits of the origin are bracketed by the side on which the
separatrix first returns to the section; the side flips exactly when the
separatrix passes through the origin. The T-point (separatrix of the origin
landing on the other wing center) is a 2D root of a residual measured on a
small sphere around that wing center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .core import Params, fixed_points, in_domain_A, symmetry_map
from .errors import BracketInvalid, Captured, PathOutsideDomain, SearchFailed, TooCloseToAxis
from .integrator import DEFAULT_CONFIG, EventSpec, IntegratorConfig, Trajectory, _march, ball_event
from .manifolds import (
    OFFSET_FACTOR,
    WindingCount,
    _capture_events,
    lobe_sequence,
    _join,
    base_scale,
    kneading_sequence,
    stable_direction,
    unstable_direction,
    winding_numbers,
)
from .section import BOUNDARY, Section, SectionSpec, build_section

SENTINEL = 1.0e3


@dataclass(frozen=True)
class SearchConfig:
    param_tol: float = 1e-6
    residual_tol: float = 1e-6
    max_iters: int = 200
    match_factor: float = 1e-2  # match sphere radius around the target, in units of x0
    simplex_step: float = 0.02
    fd_step: float = 1e-6

    def __post_init__(self):
        for name in ("param_tol", "residual_tol", "match_factor", "simplex_step", "fd_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


DEFAULT_SEARCH = SearchConfig()


@dataclass
class ConnectionResult:
    kind: str  # "homoclinic" or "heteroclinic"
    params: Params
    residual: float
    winding: WindingCount
    hits_before_connection: int
    iterations: int
    N: Optional[int] = None
    history: List[float] = field(default_factory=list)
    arc: Optional[Trajectory] = None

    def to_record(self):
        w = self.winding
        return {
            "kind": self.kind,
            "N": self.N,
            "beta": self.params.beta,
            "sigma": self.params.sigma,
            "rho": self.params.rho,
            "residual": self.residual,
            "winding": {
                "plus": w.n_plus,
                "minus": w.n_minus,
                "raw_plus": w.raw_plus,
                "raw_minus": w.raw_minus,
            },
            "hits_before_connection": self.hits_before_connection,
            "iterations": self.iterations,
        }


def _section(p, spec):
    return build_section(p, spec or SectionSpec(), validate=False)


# ------------------------------------------------------------------ homoclinic


def first_return_signature(
    p: Params,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    *,
    side="plus",
    crossing=1,
    spec: Optional[SectionSpec] = None,
):
    """Signed x coordinate of the separatrix at its ``crossing``-th section hit.

    Positive means the A side. The separatrix is allowed to pass near the
    origin; capture by a wing center first raises :class:`Captured`.
    """
    if not in_domain_A(p):
        raise ValueError("first_return_signature needs parameters in domain A")
    sec = _section(p, spec)
    seq = kneading_sequence(p, sec, crossing, cfg, side=side, capture_origin=False)
    if len(seq.symbols) < crossing:
        if seq.terminal in ("p+", "p-"):
            raise Captured(seq.terminal, seq.times[-1] if seq.times else None)
        if seq.terminal != "boundary":
            raise SearchFailed(f"separatrix reached {seq.terminal} before crossing {crossing}")
    return float(seq.points[-1][0])


def loop_signature(p: Params, cfg: IntegratorConfig = DEFAULT_CONFIG, *, side="plus", loops=1):
    """+1 or -1 for the wing of the separatrix loop following its first ``loops`` loops.

    A wing capture before that loop returns the captured wing's sign.
    """
    signs, _, terminal = lobe_sequence(p, loops + 1, cfg, side=side)
    if len(signs) > loops:
        return signs[loops]
    if terminal in ("p+", "p-"):
        return 1 if terminal == "p+" else -1
    raise SearchFailed(f"separatrix reached {terminal} before loop {loops + 1}")


def _side_value(p, cfg, side, crossing, spec, signature="section"):
    """(sign, signature) with wing captures mapped to the wing's side."""
    if signature == "loop":
        sign = loop_signature(p, cfg, side=side, loops=crossing)
        return sign, float(sign)
    try:
        value = first_return_signature(p, cfg, side=side, crossing=crossing, spec=spec)
    except Captured as exc:
        return (1 if exc.target == "p+" else -1), math.nan
    if value == 0.0:
        return 0, value
    return (1 if value > 0 else -1), value


def homoclinic_arc(
    p: Params,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    *,
    side="plus",
    crossing=1,
    spec: Optional[SectionSpec] = None,
    extra_time=2.0,
    signature="section",
):
    """Separatrix near a homoclinic parameter, cut at its closest return to the origin.

    Returns ``(arc, hits)`` where ``hits`` counts section crossings before
    the cut.
    """
    sec = _section(p, spec)
    if signature == "loop":
        # run through the last completed loop, then look for the return to the origin
        _, times, _, traj = lobe_sequence(p, crossing, cfg, side=side, record=True)
        t_from = times[-1] if times else 0.0
        seq = kneading_sequence(p, sec, 4 * crossing + 4, cfg.with_max_time(traj.t[-1] + extra_time), side=side, capture_origin=False)
    else:
        seq, traj = kneading_sequence(
            p, sec, crossing, cfg, side=side, capture_origin=False, record=True
        )
        t_from = 0.0
    s = traj.end
    more, _, _, _ = _march(p, s, cfg, 1, extra_time)
    arc = _join([traj, more], p, 1)
    tq, pts = arc.sample(per_step=4)
    dist = np.linalg.norm(pts, axis=1)
    away = np.nonzero((dist > p.x0) & (tq >= t_from))[0]
    start = away[0] if len(away) else 0
    k = start + int(np.argmin(dist[start:]))
    t_cut = float(tq[k])
    hits = int(sum(1 for t in seq.times if t <= t_cut))
    return arc.truncated(t_cut), hits


def find_homoclinic(
    beta,
    sigma,
    rho_bracket,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    search: SearchConfig = DEFAULT_SEARCH,
    *,
    side="plus",
    crossing=1,
    spec: Optional[SectionSpec] = None,
    signature="section",
):
    """Bisection in rho on the sign of a separatrix signature.

    With ``signature="section"`` the sign is that of x at the ``crossing``-th
    section crossing; the principal orbit uses the first. With
    ``signature="loop"`` the sign is the wing of the loop after ``crossing``
    completed loops, which flips exactly when the separatrix passes through
    the stable manifold of the origin after that many loops.
    """
    if signature not in ("section", "loop"):
        raise ValueError(f"signature must be 'section' or 'loop', got {signature!r}")
    lo, hi = map(float, rho_bracket)
    if not lo < hi:
        raise BracketInvalid("rho bracket must satisfy lo < hi")
    s_lo, _ = _side_value(Params(sigma, lo, beta), cfg, side, crossing, spec, signature)
    s_hi, _ = _side_value(Params(sigma, hi, beta), cfg, side, crossing, spec, signature)
    if s_lo == 0 or s_hi == 0 or s_lo == s_hi:
        raise BracketInvalid(f"signature does not change sign on [{lo}, {hi}] (signs {s_lo}, {s_hi})")
    history = []
    iterations = 0
    while hi - lo > search.param_tol:
        if iterations >= search.max_iters:
            raise SearchFailed("bisection exceeded max_iters", best=0.5 * (lo + hi))
        mid = 0.5 * (lo + hi)
        s_mid, _ = _side_value(Params(sigma, mid, beta), cfg, side, crossing, spec, signature)
        iterations += 1
        if s_mid == 0:
            lo = hi = mid
            break
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
        history.append(hi - lo)
    rho_star = 0.5 * (lo + hi)
    p_star = Params(sigma, rho_star, beta)
    # the side still captured by (or first returning to) its own wing gives the clean arc
    rho_arc = lo if (s_lo > 0) == (side == "plus") else hi
    arc, hits = homoclinic_arc(
        Params(sigma, rho_arc, beta), cfg, side=side, crossing=crossing, spec=spec, signature=signature
    )
    winding = winding_numbers(arc, p_star)
    return ConnectionResult(
        kind="homoclinic",
        params=p_star,
        residual=hi - lo,
        winding=winding,
        hits_before_connection=hits,
        iterations=iterations,
        N=winding.n_plus + winding.n_minus,
        history=history,
        arc=arc,
    )


# ------------------------------------------------------------------ heteroclinic


@dataclass(frozen=True)
class _MatchGeometry:
    center: np.ndarray
    radius: float
    pierce: np.ndarray  # where the incoming stable branch crosses the sphere
    basis: np.ndarray  # (2, 3) orthonormal, transverse to the branch


def _match_geometry(p: Params, side, cfg, search):
    fps = fixed_points(p)
    target = "minus" if side == "plus" else "plus"
    center = fps.p_minus if target == "minus" else fps.p_plus
    radius = search.match_factor * p.x0
    # the incoming half is the one on the opposite side from the quadrant branch
    v = -stable_direction(p, target)
    seed = center + OFFSET_FACTOR * base_scale(p, center) * v
    exit_ev = EventSpec(
        fun=lambda _p, s: np.linalg.norm(np.asarray(s) - center, axis=-1) - radius,
        direction="up",
        name="exit",
    )
    _, hit, _, _ = _march(p, seed, cfg.with_max_time(50.0), -1, 50.0, [exit_ev], record=False)
    if hit is None:
        raise SearchFailed("stable branch did not leave the match sphere")
    d = (hit.state - center) / radius
    a = np.array([0.0, 0.0, 1.0]) if abs(d[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = a - np.dot(a, d) * d
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return _MatchGeometry(center, radius, hit.state, np.vstack([e1, e2]))


def heteroclinic_residual(
    p: Params,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    search: SearchConfig = DEFAULT_SEARCH,
    *,
    side="plus",
    spec: Optional[SectionSpec] = None,
    record=False,
):
    """2D offset between the separatrix and the stable branch of the far wing center.

    The separatrix (``gamma+`` for ``side='plus'``) is integrated until it
    enters the match sphere around the opposite wing center; the offset of
    the entry point from the stable branch's piercing point, projected on the
    plane transverse to the branch, is returned. If the separatrix meets the
    section first, a sentinel ``(+-(SENTINEL + d), 0)`` is returned, signed by
    the symbol of the crossing and graded by ``d``, the closest approach to
    the match sphere (in sphere radii) before the crossing. With ``record`` a
    tuple ``(residual, trajectory)`` is returned.
    """
    if not in_domain_A(p):
        raise ValueError("heteroclinic_residual needs parameters in domain A")
    geo = _match_geometry(p, side, cfg, search)
    sec = _section(p, spec)
    own = "p+" if side == "plus" else "p-"
    match = ball_event(geo.center, geo.radius, "match")
    events = sec.events() + [match] + [e for e in _capture_events(p) if e.name == own]
    u = unstable_direction(p) * (1.0 if side == "plus" else -1.0)
    seed = OFFSET_FACTOR * base_scale(p, np.zeros(3)) * u
    traj, hit, t_end, _ = _march(p, seed, cfg, 1, cfg.max_time, events)
    if hit is None:
        raise SearchFailed("separatrix neither met the section nor the match sphere before max_time")
    if hit.event == own:
        raise Captured(own, t_end)
    if hit.event == "match":
        res = geo.basis @ (hit.state - geo.pierce)
    else:
        _, pts = traj.sample(per_step=4)
        gap = np.min(np.linalg.norm(pts - geo.center, axis=1)) / geo.radius - 1.0
        symbol = sec.symbol_of(hit.state)
        sign = -1.0 if symbol == "B" else 1.0
        res = np.array([sign * (SENTINEL + max(gap, 0.0)), 0.0])
    if record:
        return res, traj
    return res


def is_sentinel(res):
    return abs(res[0]) >= SENTINEL


def _nelder_mead(f, x0, step, max_iters, target, history):
    """Plain Nelder-Mead; the best value is non-increasing over iterations."""
    n = len(x0)
    pts = [np.asarray(x0, dtype=float)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = step[i]
        pts.append(pts[0] + e)
    vals = [f(q) for q in pts]
    it = 0
    while it < max_iters:
        order = np.argsort(vals)
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        history.append(vals[0])
        if vals[0] <= target:
            break
        spread = max(np.max(np.abs(q - pts[0])) for q in pts[1:])
        if spread < 1e-12:
            break
        it += 1
        centroid = np.mean(pts[:-1], axis=0)
        xr = centroid + (centroid - pts[-1])
        fr = f(xr)
        if fr < vals[0]:
            xe = centroid + 2.0 * (centroid - pts[-1])
            fe = f(xe)
            pts[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
        else:
            if fr < vals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (pts[-1] - centroid)
            fc = f(xc)
            if fc < min(fr, vals[-1]):
                pts[-1], vals[-1] = xc, fc
            else:
                for i in range(1, len(pts)):
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0])
                    vals[i] = f(pts[i])
    k = int(np.argmin(vals))
    return pts[k], vals[k], it


def find_tpoint(
    beta,
    guess,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    search: SearchConfig = DEFAULT_SEARCH,
    *,
    side="plus",
    spec: Optional[SectionSpec] = None,
    polish_below=1e-2,
):
    """Locate ``(rho, sigma)`` where the separatrix lands on the far wing center.

    Simplex descent on the residual norm brings the iterate into the smooth
    basin (norm below ``polish_below``); a damped Newton iteration with
    finite-difference Jacobian then drives the residual below
    ``search.residual_tol``. If the guess is already inside the basin the
    simplex stage is skipped.
    """
    beta = float(beta)

    def residual(q):
        rho, sigma = float(q[0]), float(q[1])
        try:
            p = Params(sigma, rho, beta)
        except ValueError:
            return np.array([np.inf, np.inf])
        if not in_domain_A(p):
            return np.array([np.inf, np.inf])
        try:
            return heteroclinic_residual(p, cfg, search, side=side, spec=spec)
        except Captured:
            return np.array([2 * SENTINEL, 0.0])

    def norm(q):
        return float(np.linalg.norm(residual(q)))

    x = np.asarray(guess, dtype=float)
    history = []
    iterations = 0
    r = residual(x)
    if not np.linalg.norm(r) < polish_below:
        x, fx, it = _nelder_mead(norm, x, [search.simplex_step] * 2, search.max_iters, polish_below, history)
        iterations += it
        r = residual(x)
        if not fx < polish_below:
            raise SearchFailed(f"simplex stage stalled at |r|={fx:.3e}", best=(x, fx))
    # damped Newton on the smooth branch
    while np.linalg.norm(r) > search.residual_tol:
        if iterations >= search.max_iters:
            raise SearchFailed(f"no convergence in {search.max_iters} iterations", best=(x, float(np.linalg.norm(r))))
        iterations += 1
        J = np.empty((2, 2))
        for j in range(2):
            dx = np.zeros(2)
            dx[j] = search.fd_step
            J[:, j] = (residual(x + dx) - residual(x - dx)) / (2 * search.fd_step)
        if not np.all(np.isfinite(J)) or is_sentinel(residual(x + dx)):
            raise SearchFailed("finite-difference Jacobian left the smooth basin", best=(x, float(np.linalg.norm(r))))
        try:
            step = -np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            raise SearchFailed("singular Jacobian in the polishing stage", best=(x, float(np.linalg.norm(r)))) from None
        lam = 1.0
        r0 = float(np.linalg.norm(r))
        while lam > 1e-4:
            x_new = x + lam * step
            r_new = residual(x_new)
            if np.linalg.norm(r_new) < r0:
                break
            lam *= 0.5
        else:
            raise SearchFailed("line search failed in the polishing stage", best=(x, r0))
        x, r = x_new, r_new
        history.append(float(np.linalg.norm(r)))
    p_star = Params(float(x[1]), float(x[0]), beta)
    res, traj = heteroclinic_residual(p_star, cfg, search, side=side, spec=spec, record=True)
    winding = winding_numbers(traj, p_star, check=False)
    return ConnectionResult(
        kind="heteroclinic",
        params=p_star,
        residual=float(np.linalg.norm(res)),
        winding=winding,
        hits_before_connection=0,
        iterations=iterations,
        history=history,
        arc=traj,
    )


# ------------------------------------------------------------------ path scans


@dataclass
class ScanSample:
    s: float
    params: Params
    prefix: str
    terminal: str
    signature: float
    sign: int


def path_scan(
    path: Callable[[float], Params],
    n,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    *,
    prefix_len=6,
    spec: Optional[SectionSpec] = None,
):
    """Sample ``path(s)`` for ``s`` in ``[0, 1]`` and locate changes.

    Returns ``(samples, sign_changes, prefix_changes)`` where the change lists
    hold ``(s_left, s_right)`` subintervals.
    """
    if n < 2:
        raise ValueError("path_scan needs at least two samples")
    samples = []
    for s in np.linspace(0.0, 1.0, int(n)):
        p = path(float(s))
        if not in_domain_A(p):
            raise PathOutsideDomain(f"path leaves domain A at s={s:.6g}: {p}")
        sec = _section(p, spec)
        seq = kneading_sequence(p, sec, prefix_len, cfg, capture_origin=False)
        sign, value = _side_value(p, cfg, "plus", 1, spec)
        samples.append(ScanSample(float(s), p, seq.word, seq.terminal, value, sign))
    sign_changes = [
        (a.s, b.s) for a, b in zip(samples, samples[1:]) if a.sign != b.sign
    ]
    prefix_changes = [
        (a.s, b.s)
        for a, b in zip(samples, samples[1:])
        if (a.prefix, a.terminal) != (b.prefix, b.terminal)
    ]
    return samples, sign_changes, prefix_changes
