"""Paraboloid cross-section for the Lorenz flow.

The surface ``P = {xy = beta z}`` is where ``z`` is stationary. The section
``R`` is the union of

* the *plane part*: the strip ``{z = eps, xy < beta eps}`` inside ``P``,
  crossed downward;
* the *paraboloid part*: the pieces of ``P`` with ``z >= eps`` (one in each
  of the quadrants ``x, y > 0`` and ``x, y < 0``) lying on the outward side
  of the tangency curves ``delta+-``, crossed from inside to outside.

Both parts are graphs over the ``(x, y)`` plane, so ``(x, y)`` is used as a
chart for the whole section: ``z = eps`` below the junction hyperbola
``xy = beta eps`` and ``z = xy / beta`` above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .core import Params, fixed_points, in_domain_A, symmetry_map, vector_field
from .errors import EmptyCurves, NotOnSection, NotTrapping, SectionInvalid
from .integrator import DEFAULT_CONFIG, EventSpec, IntegratorConfig, _march, ball_event

PLANE = "plane"
PARABOLOID = "paraboloid"
SYMBOL_A = "A"
SYMBOL_B = "B"
BOUNDARY = "Boundary"
MIN_PROGRESS = 1e-6


def paraboloid_value(p: Params, s):
    """``xy - beta z``; negative on the inside (the side containing the upper z axis)."""
    s = np.asarray(s, dtype=float)
    return s[..., 0] * s[..., 1] - p.beta * s[..., 2]


def paraboloid_normal(p: Params, s):
    s = np.asarray(s, dtype=float)
    return np.stack([s[..., 1], s[..., 0], np.full(s.shape[:-1], -p.beta)], axis=-1)


def tangency_value(p: Params, x, y):
    """``N . X`` on ``P`` with ``z`` eliminated through ``z = xy / beta``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return p.sigma * y**2 - p.sigma * x * y + p.rho * x**2 - x * y - x**3 * y / p.beta


def flux_through_paraboloid(p: Params, s):
    """``N . X`` at arbitrary states (equals :func:`tangency_value` on ``P``)."""
    return np.sum(paraboloid_normal(p, s) * vector_field(p, s), axis=-1)


def ellipsoid_value(p: Params, s):
    """``rho x^2 + sigma y^2 + sigma (z - 2 rho)^2``; compare against ``radius**2``."""
    s = np.asarray(s, dtype=float)
    return p.rho * s[..., 0] ** 2 + p.sigma * s[..., 1] ** 2 + p.sigma * (s[..., 2] - 2 * p.rho) ** 2


def ellipsoid_flux(p: Params, s):
    """Outward normal of the level ellipsoid dotted with the field (half of d/dt)."""
    s = np.asarray(s, dtype=float)
    x, y, z = s[..., 0], s[..., 1], s[..., 2]
    return -p.sigma * (p.rho * x**2 + y**2 + p.beta * z**2 - 2 * p.rho * p.beta * z)


# ---------------------------------------------------------------- tangency curves


def _turning_x(p: Params):
    """Smallest |x| at which ``N . X = 0`` has real roots in ``y``."""
    return math.sqrt(p.beta * (2.0 * math.sqrt(p.sigma * p.rho) - p.sigma - 1.0))


def tangency_roots(p: Params, x):
    """Both roots ``y_low <= y_high`` (for x > 0) of the quadratic in ``y``.

    Returns ``nan`` where the discriminant is negative.
    """
    x = np.asarray(x, dtype=float)
    bb = (p.sigma + 1.0 + x**2 / p.beta) * x  # -(linear coefficient)
    disc = bb**2 - 4.0 * p.sigma * p.rho * x**2
    with np.errstate(invalid="ignore"):
        sq = np.sqrt(disc)
    s = np.where(bb >= 0, 1.0, -1.0)
    q = bb + s * sq
    with np.errstate(invalid="ignore", divide="ignore"):
        far = q / (2.0 * p.sigma)
        near = np.where(q != 0, 2.0 * p.rho * x**2 / q, 0.0)
    return near, far


def in_hairpin(p: Params, x, y):
    """True strictly between the two tangency branches (the inward-flux region of ``P``)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    near, far = tangency_roots(p, x)
    lo = np.fmin(near, far)
    hi = np.fmax(near, far)
    with np.errstate(invalid="ignore"):
        return np.where(np.isnan(lo), False, (y > lo) & (y < hi))


def _polish_y(p, x, y):
    # one Newton step in y on the quartic keeps residuals at round-off
    f = tangency_value(p, x, y)
    df = 2 * p.sigma * y - (p.sigma + 1.0) * x - x**3 / p.beta
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where(df != 0, f / df, 0.0)
    # near the turning point df -> 0 and the Newton step is meaningless
    step = np.where(np.abs(step) <= 1e-8 * np.maximum(1.0, np.abs(y)), step, 0.0)
    return y - step


@dataclass(frozen=True)
class TangencyCurves:
    delta_plus: np.ndarray  # (n, 3)
    delta_minus: np.ndarray

    def to_csv(self, prefix):
        from .integrator import write_csv

        write_csv(f"{prefix}_delta_plus.csv", ["x", "y", "z"], self.delta_plus)
        write_csv(f"{prefix}_delta_minus.csv", ["x", "y", "z"], self.delta_minus)


def default_bbox(p: Params):
    r = 3.0 * p.x0
    return ((-r, r), (-r, r))


def tangency_curves(p: Params, bbox=None, resolution=400):
    """The two tangency curves, each threaded through its wing center."""
    if not in_domain_A(p):
        raise ValueError("tangency_curves needs parameters in domain A")
    if bbox is None:
        bbox = default_bbox(p)
    (xmin, xmax), (ymin, ymax) = bbox
    x0 = p.x0
    if not any(xmin <= c <= xmax and ymin <= c <= ymax for c in (x0, -x0)):
        raise EmptyCurves("bounding box contains neither wing center")
    xc = _turning_x(p)
    x_far = max(abs(xmin), abs(xmax))
    if x_far <= xc:
        raise EmptyCurves("bounding box does not reach the tangency curves")
    s = np.linspace(0.0, 1.0, int(resolution))
    xs = xc + (x_far - xc) * s**2
    near, far = tangency_roots(p, xs)
    near[0] = far[0] = xc * math.sqrt(p.rho / p.sigma)  # merged roots at the turning point
    # thread: near branch from the far end inward, then the far branch outward
    xline = np.concatenate([xs[::-1], xs[1:]])
    yline = np.concatenate([near[::-1], far[1:]])
    yline = _polish_y(p, xline, yline)
    plus = np.column_stack([xline, yline, xline * yline / p.beta])

    def clip(curve, center):
        inside = (
            (curve[:, 0] >= xmin) & (curve[:, 0] <= xmax) & (curve[:, 1] >= ymin) & (curve[:, 1] <= ymax)
        )
        if not inside.any():
            return curve[:0]
        # keep the contiguous run nearest the wing center
        idx = np.nonzero(inside)[0]
        runs = np.split(idx, np.nonzero(np.diff(idx) > 1)[0] + 1)
        d = [np.min(np.linalg.norm(curve[r, :2] - center[:2], axis=1)) for r in runs]
        return curve[runs[int(np.argmin(d))]]

    fps = fixed_points(p)
    dp = clip(plus, fps.p_plus)
    dm = clip(symmetry_map(plus), fps.p_minus)
    if len(dp) == 0 and len(dm) == 0:
        raise EmptyCurves("tangency curves leave the bounding box")
    return TangencyCurves(dp, dm)


def tangency_ellipsoid_intersections(p: Params, radius):
    """The four points where the tangency curves meet the ellipsoid of given radius."""
    xc = _turning_x(p)
    r2 = float(radius) ** 2

    def on_branch(x, which):
        near, far = tangency_roots(p, x)
        y = near if which == 0 else far
        y = float(_polish_y(p, x, y))
        return np.array([x, y, x * y / p.beta])

    out = []
    turning = on_branch(xc, 0)
    if ellipsoid_value(p, turning) >= r2:
        return np.zeros((0, 3))
    for which in (0, 1):
        hi = 2.0 * xc + 1.0
        while ellipsoid_value(p, on_branch(hi, which)) < r2:
            hi *= 2.0
        x = brentq(lambda t: ellipsoid_value(p, on_branch(t, which)) - r2, xc, hi, xtol=1e-14, rtol=1e-15)
        out.append(on_branch(x, which))
    pts = np.array(out)
    return np.vstack([pts, symmetry_map(pts)])


# ---------------------------------------------------------------------- section


@dataclass(frozen=True)
class SectionSpec:
    """Section construction knobs; ``None`` fields get parameter-dependent defaults."""

    epsilon: Optional[float] = None
    ellipsoid_radius: float = 1000.0
    smoothing_band: Optional[float] = None
    tangency_margin: float = 1e-6
    boundary_tol: float = 1e-8

    def resolved(self, p: Params):
        eps = 1e-2 * (p.rho - 1.0) if self.epsilon is None else float(self.epsilon)
        band = 1e-3 * p.x0 if self.smoothing_band is None else float(self.smoothing_band)
        if not (0.0 < eps < p.rho - 1.0):
            raise SectionInvalid(f"epsilon={eps} must lie in (0, rho-1={p.rho - 1.0})")
        if self.ellipsoid_radius <= 0 or self.tangency_margin <= 0 or band <= 0 or self.boundary_tol < 0:
            raise SectionInvalid("section spec widths and radius must be positive")
        return replace(self, epsilon=eps, smoothing_band=band)


@dataclass(frozen=True)
class SectionPoint:
    state: np.ndarray
    part: str
    symbol: str
    crossing_time: float
    grazing: bool = False

    @property
    def chart(self):
        return self.state[:2].copy()


@dataclass(frozen=True)
class Section:
    params: Params
    spec: SectionSpec
    curves: TangencyCurves
    eta: Optional[np.ndarray] = None  # optional (m, 2) polyline replacing {x = 0}

    @property
    def epsilon(self):
        return self.spec.epsilon

    # -- geometry -----------------------------------------------------------
    def height(self, x, y, smooth=False):
        """Height of the section surface above ``(x, y)``."""
        eps = self.spec.epsilon
        zp = np.asarray(x) * np.asarray(y) / self.params.beta
        if not smooth:
            return np.maximum(eps, zp)
        w = self.spec.smoothing_band
        return eps + w * np.logaddexp(0.0, (zp - eps) / w)

    def lift(self, xy):
        """Chart ``(x, y)`` -> point on the (unsmoothed) section."""
        xy = np.asarray(xy, dtype=float)
        z = self.height(xy[..., 0], xy[..., 1])
        return np.concatenate([xy, np.asarray(z)[..., None]], axis=-1)

    def inside_ellipsoid(self, s):
        return ellipsoid_value(self.params, s) <= self.spec.ellipsoid_radius**2

    def part_of(self, s, tol=1e-9):
        """``'plane'``, ``'paraboloid'`` or ``None`` for a single state."""
        p = self.params
        s = np.asarray(s, dtype=float)
        x, y, z = s
        eps = self.spec.epsilon
        if not self.inside_ellipsoid(s):
            return None
        scale = max(1.0, abs(z))
        on_plane = abs(z - eps) <= tol * scale and x * y - p.beta * eps < 0
        on_par = (
            abs(x * y - p.beta * z) <= tol * max(1.0, abs(x * y), p.beta * abs(z))
            and z >= eps - tol * scale
            and x * y > 0
            and not bool(in_hairpin(p, x, y))
        )
        if on_plane and on_par:
            return PLANE if abs(z - eps) <= abs(x * y / p.beta - z) else PARABOLOID
        if on_plane:
            return PLANE
        if on_par:
            return PARABOLOID
        # junction fillet: cosmetic smoothing of the corner
        zs = float(self.height(x, y, smooth=True))
        if abs(x * y / p.beta - eps) <= self.spec.smoothing_band and abs(z - zs) <= tol * scale:
            return PLANE if x * y < p.beta * eps else PARABOLOID
        return None

    def contains(self, s, tol=1e-9):
        return self.part_of(s, tol) is not None

    def symbol_of(self, s):
        x, y = float(s[0]), float(s[1])
        btol = self.spec.boundary_tol
        if self.eta is not None and x * y - self.params.beta * self.spec.epsilon < 0:
            d = _signed_side(self.eta, np.array([x, y]))
        else:
            d = x
        if d > btol:
            return SYMBOL_A
        if d < -btol:
            return SYMBOL_B
        return BOUNDARY

    def with_eta(self, polyline):
        """Copy using a numerically computed dividing curve on the plane part.

        The polyline is given in ``(x, y)`` and is oriented so that the A side
        (containing p+) lies to the right when walking along it.
        """
        return replace(self, eta=np.asarray(polyline, dtype=float))

    # -- events -------------------------------------------------------------
    def events(self):
        """Event specs whose first accepted root is the next section crossing."""
        p = self.params
        eps = self.spec.epsilon
        r2 = self.spec.ellipsoid_radius**2

        def plane_accept(_p, s):
            return s[0] * s[1] - p.beta * eps < 0 and ellipsoid_value(p, s) <= r2

        def par_accept(_p, s):
            return s[2] >= eps and ellipsoid_value(p, s) <= r2

        plane = EventSpec(
            fun=lambda _p, s: np.asarray(s)[:, 2] - eps,
            grad=lambda _p, s: np.broadcast_to(np.array([0.0, 0.0, 1.0]), np.shape(s)),
            direction="down",
            accept=plane_accept,
            name=PLANE,
        )
        par = EventSpec(
            fun=lambda _p, s: paraboloid_value(p, s),
            grad=lambda _p, s: paraboloid_normal(p, s),
            scale=lambda _p, s: abs(s[0] * s[1]) + p.beta * abs(s[2]),
            direction="up",
            accept=par_accept,
            name=PARABOLOID,
        )
        return [plane, par]


def _signed_side(poly, q):
    """Signed distance from ``q`` to a 2D polyline; positive on the right-hand side."""
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    L2 = np.sum(ab * ab, axis=1)
    tt = np.clip(np.sum((q - a) * ab, axis=1) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    proj = a + tt[:, None] * ab
    d = np.linalg.norm(q - proj, axis=1)
    k = int(np.argmin(d))
    cross = ab[k, 0] * (q[1] - a[k, 1]) - ab[k, 1] * (q[0] - a[k, 0])
    return -math.copysign(d[k], cross) if cross != 0 else 0.0


def build_section(p: Params, spec: SectionSpec = SectionSpec(), *, validate=True, n_samples=2000, seed=0):
    if not in_domain_A(p):
        raise SectionInvalid(f"parameters {p} are outside domain A")
    spec = spec.resolved(p)
    sec = Section(p, spec, tangency_curves(p))
    if validate:
        validate_transversality(p, sec, n_samples, seed=seed)
    return sec


def classify_crossing(sec: Section, s, t=0.0, *, tol=1e-9, allow_grazing=False):
    s = np.asarray(s, dtype=float)
    part = sec.part_of(s, tol)
    if part is None:
        raise NotOnSection(f"state {s} is not on the section")
    grazing = False
    if part == PARABOLOID:
        flux = float(flux_through_paraboloid(sec.params, s))
        if flux < sec.spec.tangency_margin:
            if not allow_grazing:
                raise NotOnSection(f"flux {flux:.3e} through the paraboloid is below the tangency margin")
            grazing = True
    return SectionPoint(s.copy(), part, sec.symbol_of(s), float(t), grazing)


# ------------------------------------------------------------------ crossings


def next_crossing(sec: Section, s0, cfg: IntegratorConfig = DEFAULT_CONFIG, *, extra_events=(), record=False, t_min=MIN_PROGRESS):
    """First section crossing strictly after ``t_min``.

    ``extra_events`` (e.g. capture balls) compete with the section events; the
    result is ``(hit_name, SectionPoint_or_state, trajectory_or_None)``.
    """
    events = sec.events() + list(extra_events)
    traj, hit, _, _ = _march(sec.params, s0, cfg, 1, cfg.max_time, events, t_min=t_min, record=record)
    if hit is None:
        return None, None, traj
    if hit.event in (PLANE, PARABOLOID):
        pt = classify_crossing(sec, hit.state, hit.t, tol=1e-8, allow_grazing=True)
        if hit.grazing:
            pt = replace(pt, grazing=True)
        return hit.event, pt, traj
    return hit.event, hit, traj


def return_map(sec: Section, xy, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Chart coordinates of the next crossing, plus its SectionPoint."""
    kind, pt, _ = next_crossing(sec, sec.lift(xy), cfg)
    if kind is None:
        return None, None
    return pt.chart, pt


# ------------------------------------------------------------------ validators


def _rng(seed):
    return np.random.default_rng(seed)


def _plane_samples(p, sec, n, rng):
    eps = sec.spec.epsilon
    R2 = sec.spec.ellipsoid_radius**2 - p.sigma * (eps - 2 * p.rho) ** 2
    if R2 <= 0:
        return np.zeros((0, 3))
    ax, ay = math.sqrt(R2 / p.rho), math.sqrt(R2 / p.sigma)
    pts = []
    got = 0
    while got < n:
        m = 4 * n
        # mix of uniform and log-uniform radii so the strip near the z axis is covered
        r = np.where(rng.random(m) < 0.5, np.sqrt(rng.random(m)), np.exp(np.log(1e-6) * rng.random(m)))
        th = 2 * np.pi * rng.random(m)
        x, y = ax * r * np.cos(th), ay * r * np.sin(th)
        keep = x * y - p.beta * eps < 0
        pts.append(np.column_stack([x[keep], y[keep], np.full(keep.sum(), eps)]))
        got += keep.sum()
    return np.vstack(pts)[:n]


def _paraboloid_samples(p, sec, n, rng):
    """A-side samples of the paraboloid part (geometric region below delta+)."""
    eps = sec.spec.epsilon
    Rad = sec.spec.ellipsoid_radius
    xmax, ymax = Rad / math.sqrt(p.rho), Rad / math.sqrt(p.sigma)
    out = []
    got = 0
    for _ in range(200):
        m = 8 * n
        u = rng.random(m)
        x = np.where(u < 0.5, xmax * rng.random(m), np.exp(np.log(1e-4 * xmax) + np.log(1e4) * rng.random(m)))
        v = rng.random(m)
        y = np.where(v < 0.5, ymax * rng.random(m), np.exp(np.log(1e-4 * ymax) + np.log(1e4) * rng.random(m)))
        s = np.column_stack([x, y, x * y / p.beta])
        keep = (s[:, 2] >= eps) & sec.inside_ellipsoid(s) & ~in_hairpin(p, x, y)
        out.append(s[keep])
        got += keep.sum()
        if got >= n:
            break
    pts = np.vstack(out)[:n]
    return pts


def _junction_samples(p, sec, n):
    """Points of the hyperbola ``xy = beta eps`` (A side) inside the ellipsoid."""
    eps = sec.spec.epsilon
    c = p.beta * eps
    Rad2 = sec.spec.ellipsoid_radius**2
    # along the hyperbola parameterise by log x
    lx = np.linspace(-12, 8, 20 * n)
    x = np.exp(lx) * math.sqrt(c)
    s = np.column_stack([x, c / x, np.full_like(x, eps)])
    s = s[ellipsoid_value(p, s) <= Rad2]
    if len(s) > n:
        s = s[np.linspace(0, len(s) - 1, n).astype(int)]
    return s


def validate_transversality(p: Params, sec: Section, n_samples=10000, *, seed=0, raise_on_fail=True):
    """Sample both parts of the section and check the flow crosses them transversally.

    Returns a list of two report dicts ``{part, n_samples, min_margin,
    min_margin_A, min_margin_B, failures}``; raises :class:`SectionInvalid`
    carrying the reports when any sample fails.
    """
    rng = _rng(seed)
    eps = sec.spec.epsilon
    margin = sec.spec.tangency_margin
    reports = []

    half = max(1, n_samples // 2)
    raw = _plane_samples(p, sec, half, rng)
    # fold onto the A side; the B side is its mirror image so both sides see the same states
    plane_a = np.where((raw[:, 0] < 0)[:, None], symmetry_map(raw), raw)
    plane = np.vstack([plane_a, symmetry_map(plane_a)])
    zdot = vector_field(p, plane)[:, 2]
    plane_margin = -zdot
    fails = plane[plane_margin <= 0]
    na = len(plane_a)
    reports.append(
        {
            "part": PLANE,
            "n_samples": int(len(plane)),
            "min_margin": float(plane_margin.min()),
            "min_margin_A": float(plane_margin[:na].min()),
            "min_margin_B": float(plane_margin[na:].min()),
            "failures": fails.tolist(),
        }
    )

    n_junction = max(10, half // 10)
    par_a = np.vstack([_junction_samples(p, sec, n_junction), _paraboloid_samples(p, sec, half - n_junction, rng)])
    par = np.vstack([par_a, symmetry_map(par_a)])
    flux = flux_through_paraboloid(p, par)
    fails = par[flux < margin]
    na = len(par_a)
    reports.append(
        {
            "part": PARABOLOID,
            "n_samples": int(len(par)),
            "min_margin": float(flux.min()),
            "min_margin_A": float(flux[:na].min()),
            "min_margin_B": float(flux[na:].min()),
            "failures": fails.tolist(),
        }
    )
    failed = [r for r in reports if r["failures"]]
    if failed and raise_on_fail:
        offending = [s for r in failed for s in r["failures"]]
        err = SectionInvalid(
            f"transversality fails at {len(offending)} sampled states (eps={eps})", offending[:20]
        )
        err.reports = reports
        raise err
    return reports


def validate_trapping(p: Params, radius, n_samples=10000, *, seed=0, raise_on_fail=True):
    """Check the field points into the ellipsoid ``rho x^2 + sigma y^2 + sigma (z-2rho)^2 = radius^2``."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = _rng(seed)
    half = max(1, n_samples // 2)
    u = rng.normal(size=(half, 3))
    u /= np.linalg.norm(u, axis=1)[:, None]
    pts = np.column_stack(
        [radius * u[:, 0] / math.sqrt(p.rho), radius * u[:, 1] / math.sqrt(p.sigma), 2 * p.rho + radius * u[:, 2] / math.sqrt(p.sigma)]
    )
    pts = np.vstack([pts, symmetry_map(pts)])
    flux = ellipsoid_flux(p, pts)
    fails = pts[flux >= 0]
    report = {
        "part": "ellipsoid",
        "radius": float(radius),
        "n_samples": int(len(pts)),
        "min_margin": float((-flux).min()),
        "failures": fails.tolist(),
    }
    if len(fails) and raise_on_fail:
        err = NotTrapping(f"field exits the ellipsoid at {len(fails)} sampled states", fails[:20].tolist())
        err.report = report
        raise err
    return report


def capture_events(p: Params, radius_factor=1e-4, include_origin=False):
    """Ball events around the wing centers (and optionally the origin)."""
    fps = fixed_points(p)
    r = radius_factor * p.x0
    evs = [ball_event(fps.p_plus, r, "p+"), ball_event(fps.p_minus, r, "p-")]
    if include_origin:
        evs.append(ball_event(fps.origin, r, "origin"))
    return evs


def minimal_trapping_radius(p: Params, n=20000):
    """Smallest ellipsoid radius whose surface the field crosses inward everywhere.

    The field points inward on ``V = R^2`` exactly when that ellipsoid
    encloses ``{rho x^2 + y^2 + beta z^2 - 2 rho beta z <= 0}``, so ``R`` is the
    square root of the largest ``V`` on the boundary of that set (sampled on
    a Fibonacci sphere, then padded by 1%).
    """
    k = np.arange(n) + 0.5
    phi = np.arccos(1.0 - 2.0 * k / n)
    th = math.pi * (1.0 + math.sqrt(5.0)) * k
    u = np.column_stack([np.sin(phi) * np.cos(th), np.sin(phi) * np.sin(th), np.cos(phi)])
    s = np.column_stack(
        [p.rho * math.sqrt(p.beta / p.rho) * u[:, 0], p.rho * math.sqrt(p.beta) * u[:, 1], p.rho * (1.0 + u[:, 2])]
    )
    return 1.01 * math.sqrt(float(np.max(ellipsoid_value(p, s))))


def trapping_box(p: Params):
    """Axis-aligned bounds ``(lo, hi)`` of the minimal trapping ellipsoid."""
    r = minimal_trapping_radius(p)
    half = np.array([r / math.sqrt(p.rho), r / math.sqrt(p.sigma), r / math.sqrt(p.sigma)])
    center = np.array([0.0, 0.0, 2.0 * p.rho])
    return center - half, center + half
