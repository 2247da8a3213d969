"""Periodic orbits from symbolic words, the template check, Lorenz braids and linking.

Periodic orbits are refined by multiple shooting on the section chart
``(x, y)``: one unknown chart point per letter, solved simultaneously with a
damped Newton iteration whose block-bidiagonal Jacobian is assembled from
finite differences of single returns.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import cKDTree

from .core import Params, fixed_points, symmetry_map
from .errors import (
    GridTooSparse,
    NotOnSection,
    NotPrimitive,
    RefineFailed,
    ResolutionTooCoarse,
    SeedNotFound,
    SeparationTooSmall,
)
from .integrator import DEFAULT_CONFIG, IntegratorConfig, Trajectory, _march
from .manifolds import WindingCount, stable_trace, winding_numbers
from .section import (
    BOUNDARY,
    PLANE,
    SYMBOL_A,
    SYMBOL_B,
    Section,
    in_hairpin,
    next_crossing,
)

# ------------------------------------------------------------------ words


@dataclass(frozen=True)
class Word:
    letters: str
    primitive: bool = field(init=False)

    def __post_init__(self):
        w = str(self.letters).strip().upper()
        if not w or set(w) - {"A", "B"}:
            raise ValueError(f"word must be a nonempty string over {{A, B}}, got {self.letters!r}")
        object.__setattr__(self, "letters", w)
        object.__setattr__(self, "primitive", is_primitive(w))

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return self.letters

    def rotations(self):
        w = self.letters
        return [w[i:] + w[:i] for i in range(len(w))]

    def swapped(self):
        return Word(self.letters.translate(str.maketrans("AB", "BA")))


def is_primitive(w: str):
    """True unless ``w`` is a proper power ``u^k`` with ``k >= 2``."""
    n = len(w)
    return (w + w).find(w, 1) == n


def as_word(w):
    return w if isinstance(w, Word) else Word(w)


def primitive_words(max_len, min_len=1):
    """Primitive words up to rotation (lexicographically least representative)."""
    out = []
    for n in range(min_len, max_len + 1):
        for k in range(2**n):
            w = "".join("B" if (k >> (n - 1 - i)) & 1 else "A" for i in range(n))
            if is_primitive(w) and w == min(w[i:] + w[:i] for i in range(n)):
                out.append(w)
    return out


def same_cycle(u: str, v: str):
    return len(u) == len(v) and v in (u + u)


# ------------------------------------------------------------------ braids


@dataclass(frozen=True)
class LorenzBraid:
    word: str
    permutation: tuple
    crossing_count: int
    generators: tuple  # 1-based indices of positive generators s_i

    @property
    def braid_word(self):
        return " ".join(f"s{i}" for i in self.generators)

    def closure_components(self):
        """Number of cycles of the permutation (1 means the closure is a knot)."""
        seen = set()
        count = 0
        for i in range(len(self.permutation)):
            if i in seen:
                continue
            count += 1
            j = i
            while j not in seen:
                seen.add(j)
                j = self.permutation[j]
        return count


def lorenz_braid(w) -> LorenzBraid:
    """Permutation braid of a primitive word on the Lorenz template.

    The cyclic shifts are ordered lexicographically with A < B; the strand at
    rank ``r(i)`` (shift starting at letter ``i``) ends at rank ``r(i+1)``.
    """
    w = as_word(w)
    if not w.primitive:
        raise NotPrimitive(f"{w.letters!r} is a proper power")
    shifts = w.rotations()
    n = len(shifts)
    order = sorted(range(n), key=lambda i: shifts[i])
    rank = [0] * n
    for r, i in enumerate(order):
        rank[i] = r
    perm = [0] * n
    for i in range(n):
        perm[rank[i]] = rank[(i + 1) % n]
    # bubble sort of the target positions gives the positive generators
    a = list(perm)
    gens = []
    changed = True
    while changed:
        changed = False
        for j in range(n - 1):
            if a[j] > a[j + 1]:
                a[j], a[j + 1] = a[j + 1], a[j]
                gens.append(j + 1)
                changed = True
    inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
    return LorenzBraid(w.letters, tuple(perm), inversions, tuple(gens))


# ------------------------------------------------------------------ periodic orbits


@dataclass
class PeriodicOrbit:
    params: Params
    word: Word
    section_points: np.ndarray  # (n, 3), one per letter
    return_times: np.ndarray  # (n,)
    residual: float
    realized: str
    iterations: int = 0

    @property
    def period(self):
        return float(np.sum(self.return_times))

    def trajectory(self, cfg: IntegratorConfig = DEFAULT_CONFIG):
        """One full loop from the first section point, closed up to ``residual``."""
        p = self.params
        traj, _, _, _ = _march(p, self.section_points[0], cfg, 1, self.period)
        return traj

    def to_record(self):
        return {
            "word": self.word.letters,
            "period": self.period,
            "residual": self.residual,
            "points": [[float(v) for v in q] for q in self.section_points],
        }


def _refine_cfg(cfg: IntegratorConfig):
    # multiple shooting needs the return map smooth at the 1e-11 level
    return IntegratorConfig(
        min(cfg.rel_tol, 1e-12), min(cfg.abs_tol, 1e-14), cfg.max_step, cfg.max_time, cfg.event_tol
    )


def _return(sec: Section, xy, cfg):
    kind, pt, _ = next_crossing(sec, sec.lift(xy), cfg)
    if kind is None:
        raise RefineFailed("no section return within max_time")
    return pt


def crossing_record(sec: Section, s0, duration, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Section crossings of the orbit of ``s0`` over ``duration`` time units.

    Returns ``(times, states, symbols)``.
    """
    times, states, symbols = [], [], []
    t = 0.0
    s = np.asarray(s0, dtype=float)
    while t < duration:
        kind, pt, _ = next_crossing(sec, s, cfg.with_max_time(duration - t))
        if kind is None:
            break
        t += pt.crossing_time
        times.append(t)
        states.append(pt.state)
        symbols.append(pt.symbol)
        s = pt.state
    return np.array(times), np.array(states).reshape(-1, 3), "".join(symbols)


@dataclass
class SeedRecord:
    times: np.ndarray
    states: np.ndarray
    symbols: str


_SEED_CACHE: Dict[tuple, SeedRecord] = {}


def seed_record(sec: Section, seed_time=500.0, cfg: IntegratorConfig = DEFAULT_CONFIG, start=None):
    """Crossings of a long trajectory on the attractor (cached per parameters)."""
    p = sec.params
    key = (p.as_tuple(), sec.spec, float(seed_time), None if start is None else tuple(start))
    if key not in _SEED_CACHE:
        s0 = np.array([1.0, 1.0, p.rho - 1.0]) if start is None else np.asarray(start, dtype=float)
        # discard a transient so the seeds lie on the attractor
        _, _, _, s0 = _march(p, s0, cfg, 1, 20.0, record=False)
        _SEED_CACHE[key] = SeedRecord(*crossing_record(sec, s0, seed_time, cfg))
    return _SEED_CACHE[key]


def close_return_seeds(rec: SeedRecord, w: str, max_seeds=5):
    """Start indices whose symbol window equals ``w``, best close returns first."""
    n = len(w)
    cands = []
    for i in range(len(rec.symbols) - n):
        if rec.symbols[i : i + n] == w:
            gap = np.linalg.norm(rec.states[i + n, :2] - rec.states[i, :2])
            cands.append((gap, i))
    cands.sort()
    return [i for _, i in cands[:max_seeds]]


def _shoot(sec, q, cfg):
    """Returns of all chart points: images (n, 2), states (n, 3), times, symbols."""
    imgs, states, times, syms = [], [], [], []
    for xy in q:
        pt = _return(sec, xy, cfg)
        imgs.append(pt.chart)
        states.append(pt.state)
        times.append(pt.crossing_time)
        syms.append(pt.symbol)
    return np.array(imgs), np.array(states), np.array(times), syms


def refine_periodic(sec: Section, q0, cfg: IntegratorConfig = DEFAULT_CONFIG, *, tol=1e-9, max_iter=30, fd=1e-7):
    """Damped Newton on ``F_i = P(q_i) - q_{i+1}`` for chart points ``q``.

    Returns ``(q, residual, iterations)``. The Jacobian is block-bidiagonal:
    ``dF_i/dq_i = DP(q_i)`` (by central differences) and ``dF_i/dq_{i+1} = -I``.
    """
    rcfg = _refine_cfg(cfg)
    q = np.array(q0, dtype=float).reshape(-1, 2)
    n = len(q)

    def F(qq):
        imgs, _, _, _ = _shoot(sec, qq, rcfg)
        return (imgs - np.roll(qq, -1, axis=0)).ravel()

    f = F(q)
    res = np.max(np.abs(f))
    it = 0
    while res > tol:
        if it >= max_iter:
            raise RefineFailed(f"multiple shooting did not converge (residual {res:.3e})")
        it += 1
        J = np.zeros((2 * n, 2 * n))
        for i in range(n):
            for j in range(2):
                dq = np.zeros(2)
                dq[j] = fd
                plus = _return(sec, q[i] + dq, rcfg).chart
                minus = _return(sec, q[i] - dq, rcfg).chart
                J[2 * i : 2 * i + 2, 2 * i + j] = (plus - minus) / (2 * fd)
            k = (i + 1) % n
            J[2 * i : 2 * i + 2, 2 * k : 2 * k + 2] -= np.eye(2)
        try:
            step = -np.linalg.solve(J, f)
        except np.linalg.LinAlgError:
            raise RefineFailed("singular multiple-shooting Jacobian") from None
        lam = 1.0
        while True:
            q_new = q + lam * step.reshape(n, 2)
            try:
                f_new = F(q_new)
            except (RefineFailed, NotOnSection):
                f_new = None
            if f_new is not None and np.max(np.abs(f_new)) < res:
                break
            lam *= 0.5
            if lam < 1e-6:
                raise RefineFailed(f"line search failed at residual {res:.3e}")
        q, f = q_new, f_new
        res = np.max(np.abs(f))
    return q, res, it


def find_periodic_orbit(
    p: Params,
    sec: Section,
    w,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    *,
    seed_time=500.0,
    tol=1e-9,
    max_seeds=5,
):
    """Periodic orbit realizing the primitive word ``w`` on the section.

    Seeds come from close returns of a ``seed_time`` long trajectory whose
    symbol window equals ``w``; each is refined by multiple shooting until the
    cycle closes to ``tol``. The realized word must match ``w`` letterwise.
    """
    w = as_word(w)
    if not w.primitive:
        raise NotPrimitive(f"{w.letters!r} is a proper power")
    rec = seed_record(sec, seed_time, cfg)
    seeds = close_return_seeds(rec, w.letters, max_seeds)
    if not seeds:
        raise SeedNotFound(f"no window {w.letters!r} in {len(rec.symbols)} crossings")
    n = len(w)
    last_err = None
    for i in seeds:
        q0 = rec.states[i : i + n, :2]
        try:
            q, res, it = refine_periodic(sec, q0, cfg, tol=tol)
        except (RefineFailed, NotOnSection) as exc:
            last_err = exc
            continue
        _, states, times, syms = _shoot(sec, q, _refine_cfg(cfg))
        realized = "".join(syms)
        # the points are the preimages of the returns; roll so point k carries letter k
        points = np.roll(states, 1, axis=0)
        symbols = "".join(np.roll(np.array(list(realized)), 1))
        if symbols != w.letters:
            last_err = RefineFailed(f"converged to {symbols!r} instead of {w.letters!r}")
            continue
        fps = fixed_points(p)
        if min(np.linalg.norm(points - c, axis=1).min() for c in (fps.p_plus, fps.p_minus)) < 1e-6 * p.x0:
            last_err = RefineFailed("converged onto a wing center")
            continue
        return PeriodicOrbit(p, w, points, times, float(res), symbols, it)
    raise RefineFailed(f"all {len(seeds)} seeds failed for {w.letters!r}: {last_err}")


def find_periodic_orbits(p: Params, sec: Section, words, cfg: IntegratorConfig = DEFAULT_CONFIG, *, workers=None, **kw):
    """Run :func:`find_periodic_orbit` for several words; returns ``{word: orbit or exception}``."""
    words = [as_word(w) for w in words]
    seed_record(sec, kw.get("seed_time", 500.0), cfg)  # fill the cache once
    if workers is None:
        workers = default_workers()

    def one(w):
        try:
            return w.letters, find_periodic_orbit(p, sec, w, cfg, **kw)
        except (SeedNotFound, RefineFailed, NotPrimitive) as exc:
            return w.letters, exc

    if workers <= 1:
        return dict(one(w) for w in words)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return dict(pool.map(one, words))


def default_workers():
    env = os.environ.get("LORENZ_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


# ------------------------------------------------------------------ template


@dataclass
class TemplateReport:
    grid_n: int
    valid: Dict[str, int]
    grazing: Dict[str, int]
    symbols_in_image: Dict[str, Dict[str, int]]
    min_separation: float
    cells_checked: int
    cells_overlapping: int
    wing_distance: Dict[str, Dict[str, float]]
    disjoint: bool
    onto: bool
    images: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return self.disjoint and self.onto

    def to_record(self):
        return {
            "grid_n": self.grid_n,
            "valid": self.valid,
            "grazing": self.grazing,
            "symbols_in_image": self.symbols_in_image,
            "min_separation": self.min_separation,
            "cells_checked": self.cells_checked,
            "cells_overlapping": self.cells_overlapping,
            "wing_distance": self.wing_distance,
            "disjoint": self.disjoint,
            "onto": self.onto,
            "passed": self.passed,
        }


def template_grid(sec: Section, grid_n, box=None):
    """Lattice of about ``grid_n`` A-side section points inside ``[-box, box]^2``.

    Covers the paraboloid part in the positive quadrant outside the hairpin
    and the A side of the plane part; the B grid is its image under the
    symmetry.
    """
    p = sec.params
    X = 3.0 * p.x0 if box is None else float(box)
    eps = sec.spec.epsilon
    m = int(math.sqrt(grid_n)) + 2
    pts = np.zeros((0, 3))
    while True:
        g = np.linspace(-X, X, 2 * m)
        xx, yy = np.meshgrid(g, g)
        xy = np.column_stack([xx.ravel(), yy.ravel()])
        lifted = sec.lift(xy)
        on_par = xy[:, 0] * xy[:, 1] >= p.beta * eps
        keep = ~(on_par & in_hairpin(p, xy[:, 0], xy[:, 1]))
        keep &= sec.inside_ellipsoid(lifted)
        sym = np.array([sec.symbol_of(s) for s in lifted])
        keep &= sym == SYMBOL_A
        pts = lifted[keep]
        if len(pts) >= grid_n:
            break
        m = int(m * 1.3) + 1
    idx = np.linspace(0, len(pts) - 1, grid_n).round().astype(int)
    return pts[idx]


def _local_hull_overlaps(a, b, cell, min_cell):
    """Quadtree over 2D clouds ``a`` and ``b``; returns (leaves checked, overlapping leaves).

    A cell holding points of both clouds is a leaf when the clouds are
    linearly separable in it, or when halving it would go below ``min_cell``.
    """
    leaves = 0
    bad = []

    def visit(pa, pb, lo, size):
        nonlocal leaves
        if _separable(pa, pb):
            leaves += 1
            return
        half = 0.5 * size
        if half < min_cell:
            leaves += 1
            bad.append((tuple(lo), size, len(pa), len(pb)))
            return
        for dx in (0, 1):
            for dy in (0, 1):
                sub = lo + half * np.array([dx, dy])
                ma = np.all((pa >= sub) & (pa < sub + half), axis=1)
                mb = np.all((pb >= sub) & (pb < sub + half), axis=1)
                if ma.any() and mb.any():
                    visit(pa[ma], pb[mb], sub, half)

    ka = np.floor(a / cell).astype(int)
    kb = np.floor(b / cell).astype(int)
    for k in set(map(tuple, ka)) & set(map(tuple, kb)):
        ma = np.all(ka == k, axis=1)
        mb = np.all(kb == k, axis=1)
        visit(a[ma], b[mb], np.array(k, dtype=float) * cell, cell)
    return leaves, bad


def _separable(a, b):
    """Strict linear separability of two 2D point sets (disjoint convex hulls)."""
    # find (w, c) with w.a - c >= 1 and w.b - c <= -1
    A_ub = np.vstack([np.column_stack([-a, np.ones(len(a))]), np.column_stack([b, -np.ones(len(b))])])
    b_ub = -np.ones(len(A_ub))
    r = linprog(np.zeros(3), A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * 3, method="highs")
    return r.status == 0


def template_check(
    p: Params,
    sec: Section,
    grid_n=1000,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    *,
    box=None,
    cell=None,
    min_cell=None,
    exclude=None,
    eta=True,
    min_valid=0.9,
):
    """Map an A grid and a B grid one return forward and compare the images.

    Disjointness: inside every chart cell of side ``cell`` (default
    ``0.05 x0``) holding points of both images, the two clouds must be
    strictly linearly separable, i.e. their local convex hulls must not meet.
    After one return both images hug the same curved branch of the
    attractor, so a cell that fails is split into quarters, down to
    ``min_cell`` (default ``0.01 x0``); a failure at that size counts as an
    overlap. Balls of radius ``exclude`` (default ``0.02 x0``) around the wing
    centers, where both images accumulate, are left out. Onto: each image
    contains crossings of both symbols. With ``eta`` the plane-part symbol
    boundary is replaced by the numerically traced stable manifold of the
    origin.
    """
    if eta and sec.eta is None:
        sec = sec.with_eta(stable_trace(p, sec, cfg))
    cell = 0.05 * p.x0 if cell is None else cell
    min_cell = 0.01 * p.x0 if min_cell is None else min_cell
    exclude = 0.02 * p.x0 if exclude is None else exclude
    grid_a = template_grid(sec, grid_n, box)
    grids = {SYMBOL_A: grid_a, SYMBOL_B: symmetry_map(grid_a)}
    images, valid, grazing, counts = {}, {}, {}, {}
    for name, grid in grids.items():
        pts, syms = [], []
        n_graze = 0
        for s in grid:
            try:
                kind, pt, _ = next_crossing(sec, s, cfg.with_max_time(50.0))
            except NotOnSection:
                continue
            if kind is None:
                continue
            if pt.grazing:
                n_graze += 1
                continue
            pts.append(pt.state)
            syms.append(pt.symbol)
        images[name] = np.array(pts).reshape(-1, 3)
        valid[name] = len(pts)
        grazing[name] = n_graze
        counts[name] = {k: syms.count(k) for k in (SYMBOL_A, SYMBOL_B, BOUNDARY)}
        if len(pts) < min_valid * grid_n:
            raise GridTooSparse(f"only {len(pts)} of {grid_n} {name}-grid points returned cleanly")
    fps = fixed_points(p)
    wings = {"p+": fps.p_plus, "p-": fps.p_minus}
    ia, ib = images[SYMBOL_A][:, :2], images[SYMBOL_B][:, :2]

    def away(c):
        m = np.ones(len(c), dtype=bool)
        for w in wings.values():
            m &= np.linalg.norm(c - w[:2], axis=1) > exclude
        return m

    ca, cb = ia[away(ia)], ib[away(ib)]
    sep = float(cKDTree(cb).query(ca)[0].min()) if len(ca) and len(cb) else math.inf
    leaves, overlapping = _local_hull_overlaps(ca, cb, cell, min_cell)
    wing_distance = {
        name: {w: float(np.min(np.linalg.norm(img[:, :2] - c[:2], axis=1))) for w, c in wings.items()}
        for name, img in images.items()
    }
    onto = all(counts[n][SYMBOL_A] > 0 and counts[n][SYMBOL_B] > 0 for n in counts)
    return TemplateReport(
        grid_n=grid_n,
        valid=valid,
        grazing=grazing,
        symbols_in_image=counts,
        min_separation=sep,
        cells_checked=leaves,
        cells_overlapping=len(overlapping),
        wing_distance=wing_distance,
        disjoint=not overlapping and sep > 0.0,
        onto=onto,
        images=images,
    )


# ------------------------------------------------------------------ linking


def closed_polyline(points):
    """Drop a duplicated closing vertex; the polyline is closed implicitly."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 3:
        raise ValueError("closed curves need at least three 3D vertices")
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    return pts


def _segment_distances(p0, p1, q0, q1):
    """Minimum distances between all segment pairs (``(n, m)`` array)."""
    d1 = (p1 - p0)[:, None, :]
    d2 = (q1 - q0)[None, :, :]
    r = p0[:, None, :] - q0[None, :, :]
    a = np.sum(d1 * d1, axis=-1)
    e = np.sum(d2 * d2, axis=-1)
    f = np.sum(d2 * r, axis=-1)
    c = np.sum(d1 * r, axis=-1)
    b = np.sum(d1 * d2, axis=-1)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-300, np.clip((b * f - c * e) / denom, 0.0, 1.0), 0.0)
        t = (b * s + f) / e
        t = np.clip(t, 0.0, 1.0)
        s = np.clip((b * t - c) / a, 0.0, 1.0)
    diff = r + s[..., None] * d1 - t[..., None] * d2
    return np.linalg.norm(diff, axis=-1)


def _check_separation(a, b, factor=10.0, chunk=512):
    a1, b1 = np.roll(a, -1, axis=0), np.roll(b, -1, axis=0)
    la = np.linalg.norm(a1 - a, axis=1)
    lb = np.linalg.norm(b1 - b, axis=1)
    for i in range(0, len(a), chunk):
        d = _segment_distances(a[i : i + chunk], a1[i : i + chunk], b, b1)
        scale = np.maximum(la[i : i + chunk, None], lb[None, :])
        bad = d < factor * scale
        if np.any(bad):
            k, j = np.argwhere(bad)[0]
            raise SeparationTooSmall(
                f"segments {i + k} and {j} are {d[k, j]:.3e} apart, below {factor} x sampling scale {scale[k, j]:.3e}"
            )


def gauss_linking_raw(c1, c2, chunk=512):
    """Gauss linking integral of two closed polylines, exact per segment pair.

    Each segment pair contributes the signed solid angle of the
    quadrilateral spanned by its endpoints over ``4 pi``.
    """
    a = closed_polyline(c1)
    b = closed_polyline(c2)
    a1, b1 = np.roll(a, -1, axis=0), np.roll(b, -1, axis=0)
    total = 0.0
    for i in range(0, len(a), chunk):
        p1 = a[i : i + chunk, None, :]
        p2 = a1[i : i + chunk, None, :]
        p3 = b[None, :, :]
        p4 = b1[None, :, :]
        r13, r14, r23, r24 = p3 - p1, p4 - p1, p3 - p2, p4 - p2

        def unit(v):
            nv = np.linalg.norm(v, axis=-1, keepdims=True)
            return np.divide(v, nv, out=np.zeros_like(v), where=nv > 0)

        n1 = unit(np.cross(r13, r14))
        n2 = unit(np.cross(r14, r24))
        n3 = unit(np.cross(r24, r23))
        n4 = unit(np.cross(r23, r13))

        def asin_dot(u, v):
            return np.arcsin(np.clip(np.sum(u * v, axis=-1), -1.0, 1.0))

        omega = asin_dot(n1, n2) + asin_dot(n2, n3) + asin_dot(n3, n4) + asin_dot(n4, n1)
        sgn = np.sign(np.sum(np.cross(p4 - p3, p2 - p1) * r13, axis=-1))
        total += float(np.sum(omega * sgn))
    return total / (4.0 * math.pi)


def gauss_linking(c1, c2, *, check_separation=True, tol=0.1):
    """Integer linking number of two disjoint closed polylines."""
    a = closed_polyline(c1)
    b = closed_polyline(c2)
    if check_separation:
        _check_separation(a, b)
    raw = gauss_linking_raw(a, b)
    k = int(round(raw))
    if abs(raw - k) > tol:
        raise ResolutionTooCoarse(f"raw linking {raw:.4f} is not within {tol} of an integer")
    return k


def axis_closure(p: Params, wing="plus", *, half_length=1e4, n_arc=400, n_axis=2000, direction=None):
    """The vertical axis through a wing center, closed by a large semicircle.

    The straight part runs downward from ``z = +half_length`` to
    ``-half_length`` with vertices denser near the attractor, so that a loop
    turning clockwise about the axis (seen from above) links it positively,
    matching :func:`winding_numbers`; the semicircle of radius
    ``half_length`` bulges out horizontally along ``direction`` (default
    ``(1, -1, 0)/sqrt 2``, away from both wing centers' line).
    """
    x0 = p.x0 if wing == "plus" else -p.x0
    c = np.array([x0, x0, 0.0])
    d = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0) if direction is None else np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    # axis vertices: fine in [-200, 200], geometric outside
    core = np.linspace(-200.0, 200.0, n_axis)
    tail = np.geomspace(200.0, half_length, 60)[1:]
    zs = np.concatenate([-tail[::-1], core, tail])[::-1]
    axis = c + zs[:, None] * np.array([0.0, 0.0, 1.0])
    th = np.linspace(math.pi, 0.0, n_arc)[1:-1]
    arc = c + half_length * (np.cos(th)[:, None] * np.array([0.0, 0.0, 1.0]) + np.sin(th)[:, None] * d)
    return np.vstack([axis, arc])


def orbit_polyline(orbit: PeriodicOrbit, cfg: IntegratorConfig = DEFAULT_CONFIG, per_step=4):
    traj = orbit.trajectory(cfg)
    _, pts = traj.sample(per_step=per_step)
    return closed_polyline(pts[:-1])


def hopf_pair(n=400):
    """Unit circles in orthogonal planes, each through the other's center."""
    t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    c1 = np.column_stack([np.cos(t), np.sin(t), np.zeros_like(t)])
    c2 = np.column_stack([1.0 + np.cos(t), np.zeros_like(t), np.sin(t)])
    return c1, c2


def hopf_calibration(n=400):
    return gauss_linking(*hopf_pair(n))
