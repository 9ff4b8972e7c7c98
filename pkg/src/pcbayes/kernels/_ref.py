"""Pure-python reference kernels.

Numerically identical to the compiled versions in ``_fast.pyx`` (same
operation order); used as the import-time fallback when the extension
is unavailable, and as the slow side of the kernel benchmark.
"""
from __future__ import annotations

import math

import numpy as np

IMPLEMENTATION = "python"

_VAR_FLOOR = 1e-300


def kalman_filter(y, w, eta_v, mu0, C0):
    """Local-level Kalman filter.

    State x_i = x_{i-1} + N(0, w_i), observation y_i = x_i + N(0, eta_v).
    Returns filtered means m_{0:n}, variances C_{0:n} and the log of the
    joint density of y_{1:n} (sum of one-step predictive log densities).
    """
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    n = y.size
    m = np.empty(n + 1)
    C = np.empty(n + 1)
    m[0] = mu0
    C[0] = C0
    loglik = 0.0
    log2pi = math.log(2.0 * math.pi)
    for i in range(n):
        R = C[i] + w[i]
        S = R + eta_v
        v = y[i] - m[i]
        K = R / S
        m[i + 1] = m[i] + K * v
        C[i + 1] = R - K * R
        loglik += -0.5 * (log2pi + math.log(S) + v * v / S)
    return m, C, loglik


def ffbs_draw(m, C, w, z):
    """Backward simulation pass given filtered moments and N(0,1) draws z_{0:n}."""
    m = np.asarray(m, dtype=float)
    C = np.asarray(C, dtype=float)
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    n = m.size - 1
    x = np.empty(n + 1)
    x[n] = m[n] + math.sqrt(C[n]) * z[n]
    for i in range(n - 1, -1, -1):
        denom = C[i] + w[i]
        if denom < _VAR_FLOOR:
            denom = _VAR_FLOOR
        gain = C[i] / denom
        mean = m[i] + gain * (x[i + 1] - m[i])
        var = C[i] - gain * C[i]
        if var < 0.0:
            var = 0.0
        x[i] = mean + math.sqrt(var) * z[i]
    return x


def gamma_sde_scan(g, x0, t0, dt, scale, sigma_table, table_dx, boundaries,
                   k_start, cross_t, cross_x, path_out):
    """Advance X <- X + scale * sigma(X) * g_j through one block of draws.

    sigma is evaluated by linear interpolation on a uniform table starting
    at 0 with spacing table_dx. Boundary crossings are recorded into
    cross_t/cross_x at mesh resolution. Returns (steps_used, x, t, k).
    """
    g = np.asarray(g, dtype=float)
    sigma_table = np.asarray(sigma_table, dtype=float)
    boundaries = np.asarray(boundaries, dtype=float)
    n_steps = g.size
    n_tab = sigma_table.size
    n_bound = boundaries.size
    x = float(x0)
    t = float(t0)
    k = int(k_start)
    for j in range(n_steps):
        u = x / table_dx
        i = int(u)
        if i >= n_tab - 1:
            i = n_tab - 2
        frac = u - i
        sig = sigma_table[i] + frac * (sigma_table[i + 1] - sigma_table[i])
        x = x + scale * sig * g[j]
        t = t + dt
        path_out[j] = x
        while k < n_bound and x >= boundaries[k]:
            cross_t[k] = t
            cross_x[k] = x
            k += 1
        if k == n_bound:
            return j + 1, x, t, k
    return n_steps, x, t, k
