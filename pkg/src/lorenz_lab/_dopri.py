"""Compiled Dormand-Prince 5(4) stepping kernel for the Lorenz field.

Kept separate from :mod:`integrator` so the numba-compiled code has no
Python-object dependencies. ``sgn = -1`` integrates the negated field.
"""

import math

import numpy as np
from numba import njit

# Butcher tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# b - b_hat
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
# continuous extension (Hairer & Wanner, DOPRI5 contd5)
D1 = -12715105075.0 / 11282082432.0
D3 = 87487479700.0 / 32700410799.0
D4 = -10690763975.0 / 1880347072.0
D5 = 701980252875.0 / 199316789632.0
D6 = -1453857185.0 / 822651844.0
D7 = 69997945.0 / 29380423.0

OK, MAX_STEPS, UNDERFLOW, NONFINITE = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def rhs(sigma, rho, beta, sgn, y, out):
    out[0] = sgn * sigma * (y[1] - y[0])
    out[1] = sgn * (rho * y[0] - y[1] - y[0] * y[2])
    out[2] = sgn * (y[0] * y[1] - beta * y[2])


@njit(cache=True, nogil=True)
def _stages(sigma, rho, beta, sgn, y, k1, h, K, ytmp, ynew):
    """Fill K[1..6] given K[0] = k1; ynew gets the 5th-order solution, K[6] = f(ynew)."""
    for i in range(3):
        K[0, i] = k1[i]
    for i in range(3):
        ytmp[i] = y[i] + h * A21 * K[0, i]
    rhs(sigma, rho, beta, sgn, ytmp, K[1])
    for i in range(3):
        ytmp[i] = y[i] + h * (A31 * K[0, i] + A32 * K[1, i])
    rhs(sigma, rho, beta, sgn, ytmp, K[2])
    for i in range(3):
        ytmp[i] = y[i] + h * (A41 * K[0, i] + A42 * K[1, i] + A43 * K[2, i])
    rhs(sigma, rho, beta, sgn, ytmp, K[3])
    for i in range(3):
        ytmp[i] = y[i] + h * (A51 * K[0, i] + A52 * K[1, i] + A53 * K[2, i] + A54 * K[3, i])
    rhs(sigma, rho, beta, sgn, ytmp, K[4])
    for i in range(3):
        ytmp[i] = y[i] + h * (
            A61 * K[0, i] + A62 * K[1, i] + A63 * K[2, i] + A64 * K[3, i] + A65 * K[4, i]
        )
    rhs(sigma, rho, beta, sgn, ytmp, K[5])
    for i in range(3):
        ynew[i] = y[i] + h * (
            B1 * K[0, i] + B3 * K[2, i] + B4 * K[3, i] + B5 * K[4, i] + B6 * K[5, i]
        )
    rhs(sigma, rho, beta, sgn, ynew, K[6])


@njit(cache=True, nogil=True)
def single_step(sigma, rho, beta, sgn, y, h):
    """One DP5 step of size ``h`` without error control."""
    K = np.empty((7, 3))
    k1 = np.empty(3)
    ytmp = np.empty(3)
    ynew = np.empty(3)
    rhs(sigma, rho, beta, sgn, y, k1)
    _stages(sigma, rho, beta, sgn, y, k1, h, K, ytmp, ynew)
    return ynew


@njit(cache=True, nogil=True)
def initial_step(sigma, rho, beta, sgn, y, rtol, atol, max_step):
    f0 = np.empty(3)
    rhs(sigma, rho, beta, sgn, y, f0)
    d0 = 0.0
    d1 = 0.0
    for i in range(3):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = math.sqrt(d0 / 3.0)
    d1 = math.sqrt(d1 / 3.0)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = np.empty(3)
    for i in range(3):
        y1[i] = y[i] + h0 * f0[i]
    f1 = np.empty(3)
    rhs(sigma, rho, beta, sgn, y1, f1)
    d2 = 0.0
    for i in range(3):
        sc = atol + rtol * abs(y[i])
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = math.sqrt(d2 / 3.0) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step)


@njit(cache=True, nogil=True)
def run(sigma, rho, beta, sgn, t0, y0, t_end, h, rtol, atol, max_step, max_steps):
    """Adaptive integration from ``t0`` toward ``t_end`` (> t0) for at most ``max_steps``.

    Returns ``(n, ts, ys, cont, h_next, status)``. ``cont[k]`` holds the five
    dense-output coefficient rows for step ``k`` (from ``ts[k]`` to ``ts[k+1]``).
    """
    ts = np.empty(max_steps + 1)
    ys = np.empty((max_steps + 1, 3))
    cont = np.empty((max_steps, 5, 3))
    ts[0] = t0
    for i in range(3):
        ys[0, i] = y0[i]
    K = np.empty((7, 3))
    k1 = np.empty(3)
    ytmp = np.empty(3)
    ynew = np.empty(3)
    y = np.empty(3)
    for i in range(3):
        y[i] = y0[i]
    rhs(sigma, rho, beta, sgn, y, k1)
    t = t0
    n = 0
    status = OK
    reject_prev = False
    while n < max_steps:
        if t >= t_end:
            break
        h = min(h, max_step)
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h <= 1e-14 * max(1.0, abs(t)):
            status = UNDERFLOW
            break
        _stages(sigma, rho, beta, sgn, y, k1, h, K, ytmp, ynew)
        err = 0.0
        finite = True
        for i in range(3):
            if not math.isfinite(ynew[i]):
                finite = False
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            e = h * (
                E1 * K[0, i] + E3 * K[2, i] + E4 * K[3, i] + E5 * K[4, i] + E6 * K[5, i] + E7 * K[6, i]
            )
            err += (e / sc) ** 2
        err = math.sqrt(err / 3.0)
        if not finite or not math.isfinite(err):
            h *= 0.2
            reject_prev = True
            if h <= 1e-14 * max(1.0, abs(t)):
                status = NONFINITE
                break
            continue
        if err <= 1.0:
            for i in range(3):
                ydiff = ynew[i] - y[i]
                bspl = h * K[0, i] - ydiff
                cont[n, 0, i] = y[i]
                cont[n, 1, i] = ydiff
                cont[n, 2, i] = bspl
                cont[n, 3, i] = ydiff - h * K[6, i] - bspl
                cont[n, 4, i] = h * (
                    D1 * K[0, i] + D3 * K[2, i] + D4 * K[3, i] + D5 * K[4, i] + D6 * K[5, i] + D7 * K[6, i]
                )
                y[i] = ynew[i]
                k1[i] = K[6, i]
            t = t_end if last else t + h
            n += 1
            ts[n] = t
            for i in range(3):
                ys[n, i] = y[i]
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if reject_prev:
                fac = min(fac, 1.0)
            reject_prev = False
            h = h * fac
        else:
            h = h * max(0.2, 0.9 * err ** -0.2)
            reject_prev = True
    if status == OK and t < t_end:
        status = MAX_STEPS
    return n, ts[: n + 1].copy(), ys[: n + 1].copy(), cont[:n].copy(), h, status


@njit(cache=True, nogil=True)
def dense_eval(cont, ts, k, t):
    h = ts[k + 1] - ts[k]
    th = (t - ts[k]) / h
    th1 = 1.0 - th
    out = np.empty(3)
    for i in range(3):
        out[i] = cont[k, 0, i] + th * (
            cont[k, 1, i] + th1 * (cont[k, 2, i] + th * (cont[k, 3, i] + th1 * cont[k, 4, i]))
        )
    return out


@njit(cache=True, nogil=True)
def dense_eval_many(cont, ts, tq):
    """Evaluate the interpolant at sorted query times inside ``[ts[0], ts[-1]]``."""
    m = tq.shape[0]
    out = np.empty((m, 3))
    k = 0
    nseg = ts.shape[0] - 1
    for j in range(m):
        t = tq[j]
        while k < nseg - 1 and t > ts[k + 1]:
            k += 1
        y = dense_eval(cont, ts, k, t)
        for i in range(3):
            out[j, i] = y[i]
    return out
