"""Hot numeric kernels.

Each kernel is plain numpy-compatible Python compiled with numba when
available (see :mod:`frosim._accel`). Coefficient arrays are laid out
``(n_coeffs, n_vars)`` so one call advances every variable with its own
integrator; history arrays are ``(depth, n_vars)`` with row 0 the most
recent past entry.
"""
import numpy as np

from ._accel import NUMBA_ENABLED, njit


@njit
def gen2_step(coef, x1, d1, d2):
    """x1 + b1*d1[0] + b2*d1[1] + c1*d2[0] + c2*d2[1], per column."""
    n = x1.shape[0]
    out = np.empty(n)
    for j in range(n):
        out[j] = (x1[j] + coef[0, j] * d1[0, j] + coef[1, j] * d1[1, j]
                  + coef[2, j] * d2[0, j] + coef[3, j] * d2[1, j])
    return out


@njit
def ab_step(coef, x1, d1):
    k = coef.shape[0] - 1
    n = x1.shape[0]
    out = np.empty(n)
    for j in range(n):
        acc = coef[0, j] * x1[j]
        for i in range(k):
            acc += coef[1 + i, j] * d1[i, j]
        out[j] = acc
    return out


@njit
def bdf_history_sum(coef, past):
    k = coef.shape[0] - 1
    n = past.shape[1]
    out = np.empty(n)
    for j in range(n):
        acc = 0.0
        for i in range(k):
            acc += coef[i, j] * past[i, j]
        out[j] = acc
    return out


@njit
def bdf_residual(coef, past, x_now, xdot_now):
    k = coef.shape[0] - 1
    return x_now - bdf_history_sum(coef, past) - coef[k] * xdot_now


@njit
def bdf_differentiate(coef, past, x_now):
    k = coef.shape[0] - 1
    return (x_now - bdf_history_sum(coef, past)) / coef[k]


@njit
def _ipow(z, n):
    out = 1.0 + 0j
    for _ in range(n):
        out *= z
    return out


@njit
def error_expression(z, k, p, q, gw, gp, gq):
    """E(z) = sum gw z^gp e^{-gq z} - sum k z^p e^{-q z} over a 1-D array z."""
    out = np.empty(z.shape[0], dtype=np.complex128)
    for i in range(z.shape[0]):
        zi = z[i]
        acc = 0j
        for j in range(gw.shape[0]):
            acc += gw[j] * _ipow(zi, gp[j]) * np.exp(-gq[j] * zi)
        for j in range(k.shape[0]):
            acc -= k[j] * _ipow(zi, p[j]) * np.exp(-q[j] * zi)
        out[i] = acc
    return out


def error_expression_numpy(z, k, p, q, gw, gp, gq):
    z = np.asarray(z, dtype=complex)[:, None]
    forcing = (gw * z**gp * np.exp(-gq * z)).sum(axis=1)
    return forcing - (k * z**p * np.exp(-q * z)).sum(axis=1)


@njit
def _lu_solve(a, b):
    n = a.shape[0]
    m = a.copy()
    x = b.copy()
    scale = 0.0
    for i in range(n):
        for j in range(n):
            v = abs(m[i, j])
            if v > scale:
                scale = v
    for col in range(n):
        piv = col
        best = abs(m[col, col])
        for r in range(col + 1, n):
            v = abs(m[r, col])
            if v > best:
                best = v
                piv = r
        if best <= 1e-14 * scale or best == 0.0:
            return x, False
        if piv != col:
            for j in range(n):
                tmp = m[col, j]
                m[col, j] = m[piv, j]
                m[piv, j] = tmp
            tmp = x[col]
            x[col] = x[piv]
            x[piv] = tmp
        inv = 1.0 / m[col, col]
        for r in range(col + 1, n):
            f = m[r, col] * inv
            if f != 0.0:
                for j in range(col + 1, n):
                    m[r, j] -= f * m[col, j]
                x[r] -= f * x[col]
    for i in range(n - 1, -1, -1):
        acc = x[i]
        for j in range(i + 1, n):
            acc -= m[i, j] * x[j]
        x[i] = acc / m[i, i]
    return x, True


def solve_dense(a, b):
    """Solve ``a @ x = b``; returns ``(x, ok)`` with ``ok=False`` if singular."""
    if NUMBA_ENABLED:
        return _lu_solve(a, b)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        return b.copy(), False
    if np.linalg.cond(a) > 1e14:
        return x, False
    return x, True


@njit
def assemble_step(x, c, gamma, f, g, gd, jac, der_scale, n_diff, n_alg):
    """Residual and Jacobian of the per-step system.

    Differential rows   x - c - gamma*f(...)
    algebraic rows      g(...)
    derivative rows     der_scale * dg/dt(...)
    ``jac`` holds the partials of [f; g; dg/dt] w.r.t. [x, y, ydot].
    """
    n = n_diff + 2 * n_alg
    res = np.empty(n)
    J = np.empty((n, n))
    for i in range(n_diff):
        res[i] = x[i] - c[i] - gamma[i] * f[i]
        for j in range(n):
            J[i, j] = -gamma[i] * jac[i, j]
        J[i, i] += 1.0
    for i in range(n_alg):
        r = n_diff + i
        res[r] = g[i]
        for j in range(n):
            J[r, j] = jac[r, j]
    for i in range(n_alg):
        r = n_diff + n_alg + i
        res[r] = der_scale * gd[i]
        for j in range(n):
            J[r, j] = der_scale * jac[r, j]
    return res, J


@njit
def inf_norm(v):
    acc = 0.0
    for i in range(v.shape[0]):
        a = abs(v[i])
        if a > acc or a != a:
            acc = a
    return acc


@njit
def predict_all(gen, ab, bdf, values, d1, d2, slots, n_diff, n_alg):
    """Full predicted unknown vector from ring-buffer rows ``slots`` (newest first).

    Differential columns use the two-step second-derivative template,
    algebraic columns Adams-Bashforth, their derivatives the BDF
    differentiator applied to the freshly predicted algebraic value.
    """
    out = np.empty(n_diff + 2 * n_alg)
    s0 = slots[0]
    for j in range(n_diff):
        out[j] = (values[s0, j] + gen[0, j] * d1[s0, j] + gen[1, j] * d1[slots[1], j]
                  + gen[2, j] * d2[s0, j] + gen[3, j] * d2[slots[1], j])
    ka = ab.shape[0] - 1
    kd = bdf.shape[0] - 1
    for i in range(n_alg):
        j = n_diff + i
        y = ab[0, i] * values[s0, j]
        for m in range(ka):
            y += ab[1 + m, i] * d1[slots[m], j]
        out[j] = y
        acc = 0.0
        for m in range(kd):
            acc += bdf[m, i] * values[slots[m], j]
        out[j + n_alg] = (y - acc) / bdf[kd, i]
    return out
