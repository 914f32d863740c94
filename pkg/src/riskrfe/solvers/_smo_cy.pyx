# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled working-set solvers for the box-constrained duals.

Mirrors riskrfe.solvers._smo_py: same selection rule (maximal KKT-violating
pair, ties to the lowest index), same stopping test, same return values.
"""

from libc.math cimport fabs, INFINITY

import numpy as np

cdef double _QFLOOR = 1e-12


cdef void _refresh(const double[:, ::1] Q, const double[::1] p,
                   const double[::1] beta, double[::1] g) noexcept nogil:
    cdef Py_ssize_t N = p.shape[0]
    cdef Py_ssize_t k, t
    cdef double acc
    for k in range(N):
        acc = p[k]
        for t in range(N):
            acc += Q[k, t] * beta[t]
        g[k] = acc


def smo_solve(Q, p, yhat, double C, double tol, long max_iter):
    """Minimize (1/2) b'Qb + p'b subject to yhat'b = 0 and 0 <= b <= C.

    Returns (beta, bias, iterations, kkt_violation).
    """
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    beta_arr = np.zeros(len(p))
    g_arr = np.array(p, dtype=np.float64, copy=True)
    y_arr = np.ascontiguousarray(yhat, dtype=np.float64)
    p_arr = np.ascontiguousarray(p, dtype=np.float64)

    cdef const double[:, ::1] Qv = Q
    cdef const double[::1] pv = p_arr
    cdef const double[::1] yv = y_arr
    cdef double[::1] beta = beta_arr
    cdef double[::1] g = g_arr
    cdef Py_ssize_t N = pv.shape[0]
    cdef Py_ssize_t t, i, j, k
    cdef double m, M, v, a, step, cap, yi, yj, bias
    cdef long iters = 0
    cdef bint fresh = True

    with nogil:
        while iters < max_iter:
            m = -INFINITY
            M = INFINITY
            i = -1
            j = -1
            for t in range(N):
                v = -yv[t] * g[t]
                if (yv[t] > 0 and beta[t] < C) or (yv[t] < 0 and beta[t] > 0):
                    if v > m:
                        m = v
                        i = t
                if (yv[t] > 0 and beta[t] > 0) or (yv[t] < 0 and beta[t] < C):
                    if v < M:
                        M = v
                        j = t
            if i < 0 or j < 0 or m - M <= tol:
                if fresh:
                    break
                _refresh(Qv, pv, beta, g)
                fresh = True
                continue
            yi = yv[i]
            yj = yv[j]
            a = Qv[i, i] + Qv[j, j] - 2.0 * yi * yj * Qv[i, j]
            if a <= _QFLOOR:
                a = _QFLOOR
            step = (m - M) / a
            cap = (C - beta[i]) if yi > 0 else beta[i]
            if step > cap:
                step = cap
            cap = beta[j] if yj > 0 else (C - beta[j])
            if step > cap:
                step = cap
            beta[i] = beta[i] + yi * step
            if beta[i] < 0.0:
                beta[i] = 0.0
            elif beta[i] > C:
                beta[i] = C
            beta[j] = beta[j] - yj * step
            if beta[j] < 0.0:
                beta[j] = 0.0
            elif beta[j] > C:
                beta[j] = C
            for k in range(N):
                g[k] += step * (yi * Qv[i, k] - yj * Qv[j, k])
            fresh = False
            iters += 1
        if not fresh:
            _refresh(Qv, pv, beta, g)
        m = -INFINITY
        M = INFINITY
        i = -1
        j = -1
        for t in range(N):
            v = -yv[t] * g[t]
            if (yv[t] > 0 and beta[t] < C) or (yv[t] < 0 and beta[t] > 0):
                if v > m:
                    m = v
                    i = t
            if (yv[t] > 0 and beta[t] > 0) or (yv[t] < 0 and beta[t] < C):
                if v < M:
                    M = v
                    j = t
    if i >= 0 and j >= 0:
        bias = 0.5 * (m + M)
    elif i >= 0:
        bias = m
    elif j >= 0:
        bias = M
    else:
        bias = 0.0
    return beta_arr, bias, iters, m - M


def box_solve(Q, p, double C, double tol, long max_iter):
    """Minimize (1/2) b'Qb + p'b subject to 0 <= b <= C (no equality row).

    Returns (beta, 0.0, iterations, kkt_violation).
    """
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    beta_arr = np.zeros(len(p))
    g_arr = np.array(p, dtype=np.float64, copy=True)
    p_arr = np.ascontiguousarray(p, dtype=np.float64)

    cdef const double[:, ::1] Qv = Q
    cdef const double[::1] pv = p_arr
    cdef double[::1] beta = beta_arr
    cdef double[::1] g = g_arr
    cdef Py_ssize_t N = pv.shape[0]
    cdef Py_ssize_t t, k, tstar
    cdef double worst, w, qtt, new, delta
    cdef long iters = 0
    cdef bint fresh = True

    with nogil:
        while iters < max_iter:
            worst = 0.0
            tstar = -1
            for t in range(N):
                if beta[t] <= 0.0:
                    w = -g[t] if -g[t] > 0.0 else 0.0
                elif beta[t] >= C:
                    w = g[t] if g[t] > 0.0 else 0.0
                else:
                    w = fabs(g[t])
                if w > worst:
                    worst = w
                    tstar = t
            if tstar < 0 or worst <= tol:
                if fresh:
                    break
                _refresh(Qv, pv, beta, g)
                fresh = True
                continue
            qtt = Qv[tstar, tstar]
            if qtt < _QFLOOR:
                qtt = _QFLOOR
            new = beta[tstar] - g[tstar] / qtt
            if new < 0.0:
                new = 0.0
            elif new > C:
                new = C
            delta = new - beta[tstar]
            if delta == 0.0:
                break
            beta[tstar] = new
            for k in range(N):
                g[k] += delta * Qv[tstar, k]
            fresh = False
            iters += 1
        if not fresh:
            _refresh(Qv, pv, beta, g)
        worst = 0.0
        for t in range(N):
            if beta[t] <= 0.0:
                w = -g[t] if -g[t] > 0.0 else 0.0
            elif beta[t] >= C:
                w = g[t] if g[t] > 0.0 else 0.0
            else:
                w = fabs(g[t])
            if w > worst:
                worst = w
    return beta_arr, 0.0, iters, worst
