"""Closed-form pieces of the Lorenz system.

The vector field, its Jacobian, the reflection symmetry about the z axis,
the three equilibria and their eigen-structure. Everything here is a pure
function of a :class:`Params` triple and a state array of shape ``(3,)``
(or ``(n, 3)`` where noted).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateParameters, EigenFailure, InvalidParameters

PI_MATRIX = np.diag([-1.0, -1.0, 1.0])


@dataclass(frozen=True)
class Params:
    """Lorenz parameters ``(sigma, rho, beta)``; all strictly positive."""

    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0

    def __post_init__(self):
        for name in ("sigma", "rho", "beta"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidParameters(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value) or value <= 0.0:
                raise InvalidParameters(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def x0(self):
        """Horizontal coordinate of the wing center p+ (``nan`` when rho <= 1)."""
        if self.rho <= 1.0:
            return math.nan
        return math.sqrt(self.beta * (self.rho - 1.0))

    def as_tuple(self):
        return (self.sigma, self.rho, self.beta)

    def replace(self, **changes):
        values = {"sigma": self.sigma, "rho": self.rho, "beta": self.beta}
        values.update(changes)
        return Params(**values)


CLASSICAL = Params(10.0, 28.0, 8.0 / 3.0)


def as_state(s):
    arr = np.asarray(s, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"state must have shape (3,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state coordinates must be finite")
    return arr


def vector_field(p: Params, s):
    """Evaluate the Lorenz field. Accepts a single state or an ``(n, 3)`` stack."""
    s = np.asarray(s, dtype=float)
    x, y, z = s[..., 0], s[..., 1], s[..., 2]
    return np.stack(
        [p.sigma * (y - x), p.rho * x - y - x * z, x * y - p.beta * z], axis=-1
    )


def jacobian(p: Params, s):
    x, y, z = as_state(s)
    return np.array(
        [
            [-p.sigma, p.sigma, 0.0],
            [p.rho - z, -1.0, -x],
            [y, x, -p.beta],
        ]
    )


def divergence(p: Params):
    """Trace of the Jacobian; the same at every state."""
    return -(p.sigma + 1.0 + p.beta)


def symmetry_map(s):
    """Rotation by pi about the z axis, ``(x, y, z) -> (-x, -y, z)``.

    Works on a single state or any ``(..., 3)`` array.
    """
    s = np.asarray(s, dtype=float)
    out = s.copy()
    out[..., 0] = -out[..., 0]
    out[..., 1] = -out[..., 1]
    return out


def in_domain_A(p: Params):
    """True when the tangency curves on the paraboloid stay away from the origin."""
    return p.rho > 1.0 and p.rho > (p.sigma + 1.0) ** 2 / (4.0 * p.sigma)


@dataclass(frozen=True)
class FixedPointSet:
    origin: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray

    def named(self):
        return {"origin": self.origin, "p+": self.p_plus, "p-": self.p_minus}


def fixed_points(p: Params):
    if p.rho <= 1.0:
        raise DegenerateParameters(f"rho={p.rho} <= 1: only the origin is an equilibrium")
    x0 = p.x0
    p_plus = np.array([x0, x0, p.rho - 1.0])
    return FixedPointSet(np.zeros(3), p_plus, symmetry_map(p_plus))


@dataclass(frozen=True)
class EigenData:
    """Eigenpairs sorted by ascending real part, then imaginary part."""

    values: np.ndarray  # complex, shape (3,)
    vectors: np.ndarray  # complex, shape (3, 3); vectors[i] pairs with values[i]

    def real_negative(self):
        """Indices of the (numerically) real, negative eigenvalues."""
        return [
            i
            for i, lam in enumerate(self.values)
            if abs(lam.imag) <= 1e-12 * max(1.0, abs(lam)) and lam.real < 0
        ]

    def real_positive(self):
        return [
            i
            for i, lam in enumerate(self.values)
            if abs(lam.imag) <= 1e-12 * max(1.0, abs(lam)) and lam.real > 0
        ]


def _cubic_roots(a, b, c):
    """Roots of ``t**3 + a t**2 + b t + c`` by Cardano, Newton-polished."""
    shift = a / 3.0
    pq = b - a * a / 3.0
    qq = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    disc = (qq / 2.0) ** 2 + (pq / 3.0) ** 3
    if disc < 0.0:
        # three distinct real roots: trigonometric form
        r = 2.0 * math.sqrt(-pq / 3.0)
        phi = math.acos(max(-1.0, min(1.0, 3.0 * qq / (pq * r))))
        roots = [complex(r * math.cos((phi - 2.0 * math.pi * k) / 3.0) - shift) for k in range(3)]
    else:
        sq = math.sqrt(disc)
        u = math.copysign(abs(-qq / 2.0 + sq) ** (1.0 / 3.0), -qq / 2.0 + sq)
        v = math.copysign(abs(-qq / 2.0 - sq) ** (1.0 / 3.0), -qq / 2.0 - sq)
        w = complex(-0.5, math.sqrt(3.0) / 2.0)
        roots = [u + v - shift, u * w + v * w.conjugate() - shift, u * w.conjugate() + v * w - shift]
    polished = []
    for t in roots:
        t = complex(t)
        for _ in range(4):
            f = ((t + a) * t + b) * t + c
            df = (3.0 * t + 2.0 * a) * t + b
            if df == 0:
                break
            step = f / df
            t -= step
            if abs(step) <= 1e-16 * max(1.0, abs(t)):
                break
        polished.append(t)
    # real roots stay real
    return [complex(t.real, 0.0) if abs(t.imag) <= 1e-13 * max(1.0, abs(t)) else t for t in polished]


def _null_vector(m):
    """Unit null vector of a (numerically) rank-2 complex 3x3 matrix."""
    rows = [m[0], m[1], m[2]]
    best = None
    best_norm = -1.0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        v = np.cross(rows[i], rows[j])
        nv = np.linalg.norm(v)
        if nv > best_norm:
            best, best_norm = v, nv
    if best_norm == 0.0:
        raise EigenFailure("eigenspace is not one-dimensional")
    v = best / best_norm
    # fix the phase: largest component real and positive
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    return v


def eigen_at(p: Params, s, *, rtol=1e-10):
    """Eigenvalues/vectors of the Jacobian at ``s`` with a residual check."""
    s = as_state(s)
    if np.linalg.norm(vector_field(p, s)) > 1e-8 * max(1.0, np.linalg.norm(s)) ** 2:
        warnings.warn("eigen_at called away from an equilibrium", RuntimeWarning, stacklevel=2)
    J = jacobian(p, s)
    if np.all(s == 0.0):
        # origin: 2x2 block in (x, y) plus the decoupled -beta
        tr = -(p.sigma + 1.0)
        det = -p.sigma * (p.rho - 1.0)
        d = cmath.sqrt(tr * tr - 4.0 * det)
        values = [(tr - d) / 2.0, (tr + d) / 2.0, complex(-p.beta)]
        values = [complex(v.real, 0.0) if abs(v.imag) == 0.0 else v for v in values]
    else:
        tr = np.trace(J)
        minors = (
            J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
            + J[0, 0] * J[2, 2] - J[0, 2] * J[2, 0]
            + J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1]
        )
        values = _cubic_roots(-tr, minors, -np.linalg.det(J))
    values.sort(key=lambda lam: (lam.real, lam.imag))
    vectors = []
    for lam in values:
        v = _null_vector(J.astype(complex) - lam * np.eye(3))
        res = np.linalg.norm(J @ v - lam * v)
        if res > rtol * max(abs(lam), 1e-300) * np.linalg.norm(v):
            raise EigenFailure(f"eigenpair residual {res:.3e} too large for lambda={lam}")
        vectors.append(v)
    return EigenData(np.array(values, dtype=complex), np.array(vectors, dtype=complex))
