"""Pure-NumPy twin of the compiled working-set solver.

Same contracts as ``riskrfe.solvers._smo_cy``; used when the extension is not
built or when RISK_RFE_BACKEND=python. Selection is the maximal
KKT-violating pair, ties broken to the lowest index, so both backends walk
the same iterate sequence.
"""

from __future__ import annotations

import numpy as np

_QFLOOR = 1e-12


def _scan(g: np.ndarray, beta: np.ndarray, yhat: np.ndarray, C: float):
    """Return (i, m, j, M): argmax/min of -yhat*g over the up/low index sets."""
    v = -yhat * g
    up = ((yhat > 0) & (beta < C)) | ((yhat < 0) & (beta > 0))
    low = ((yhat > 0) & (beta > 0)) | ((yhat < 0) & (beta < C))
    if up.any():
        vu = np.where(up, v, -np.inf)
        i = int(np.argmax(vu))
        m = float(vu[i])
    else:
        i, m = -1, -np.inf
    if low.any():
        vl = np.where(low, v, np.inf)
        j = int(np.argmin(vl))
        M = float(vl[j])
    else:
        j, M = -1, np.inf
    return i, m, j, M


def smo_solve(Q, p, yhat, C, tol, max_iter):
    """Minimize (1/2) b'Qb + p'b subject to yhat'b = 0 and 0 <= b <= C.

    Two-variable working-set descent on the maximal violating pair. The
    gradient is maintained incrementally and refreshed from scratch before
    convergence is declared, so the reported violation is honest.

    Returns (beta, bias, iterations, kkt_violation); bias is the midpoint
    multiplier estimate for the equality constraint.
    """
    Q = np.asarray(Q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    N = p.shape[0]
    beta = np.zeros(N)
    g = p.copy()
    fresh = True
    iters = 0
    while iters < max_iter:
        i, m, j, M = _scan(g, beta, yhat, C)
        if i < 0 or j < 0 or m - M <= tol:
            if fresh:
                break
            g = Q @ beta + p
            fresh = True
            continue
        yi, yj = yhat[i], yhat[j]
        a = Q[i, i] + Q[j, j] - 2.0 * yi * yj * Q[i, j]
        if a <= _QFLOOR:
            a = _QFLOOR
        step = (m - M) / a
        cap_i = (C - beta[i]) if yi > 0 else beta[i]
        cap_j = beta[j] if yj > 0 else (C - beta[j])
        step = min(step, cap_i, cap_j)
        beta[i] = min(max(beta[i] + yi * step, 0.0), C)
        beta[j] = min(max(beta[j] - yj * step, 0.0), C)
        g += step * (yi * Q[i] - yj * Q[j])
        fresh = False
        iters += 1
    if not fresh:
        g = Q @ beta + p
    i, m, j, M = _scan(g, beta, yhat, C)
    if i >= 0 and j >= 0:
        bias = 0.5 * (m + M)
    elif i >= 0:
        bias = m
    elif j >= 0:
        bias = M
    else:
        bias = 0.0
    return beta, float(bias), iters, m - M


def box_solve(Q, p, C, tol, max_iter):
    """Minimize (1/2) b'Qb + p'b subject to 0 <= b <= C (no equality row).

    Single-coordinate Newton descent on the worst KKT violation; used for
    bias-free fits. Returns (beta, 0.0, iterations, kkt_violation).
    """
    Q = np.asarray(Q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    N = p.shape[0]
    beta = np.zeros(N)
    g = p.copy()
    fresh = True
    iters = 0
    while iters < max_iter:
        w = np.where(
            beta <= 0.0,
            np.maximum(-g, 0.0),
            np.where(beta >= C, np.maximum(g, 0.0), np.abs(g)),
        )
        t = int(np.argmax(w))
        if w[t] <= tol:
            if fresh:
                break
            g = Q @ beta + p
            fresh = True
            continue
        qtt = max(Q[t, t], _QFLOOR)
        new = min(max(beta[t] - g[t] / qtt, 0.0), C)
        delta = new - beta[t]
        if delta == 0.0:
            break
        beta[t] = new
        g += delta * Q[t]
        fresh = False
        iters += 1
    if not fresh:
        g = Q @ beta + p
    w = np.where(
        beta <= 0.0,
        np.maximum(-g, 0.0),
        np.where(beta >= C, np.maximum(g, 0.0), np.abs(g)),
    )
    return beta, 0.0, iters, float(w.max())
