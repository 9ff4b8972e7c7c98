# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Kalman filtering, FFBS and gamma-SDE stepping.

Mirrors kernels._ref operation-for-operation so both implementations
produce bitwise-identical output for identical inputs.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport log, sqrt

cnp.import_array()

IMPLEMENTATION = "cython"

cdef double _VAR_FLOOR = 1e-300
cdef double _LOG2PI = 1.8378770664093453


def kalman_filter(y, w, double eta_v, double mu0, double C0):
    cdef cnp.ndarray[double, ndim=1] ya = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] wa = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = ya.shape[0]
    cdef cnp.ndarray[double, ndim=1] m = np.empty(n + 1)
    cdef cnp.ndarray[double, ndim=1] C = np.empty(n + 1)
    cdef double loglik = 0.0
    cdef double R, S, v, K
    cdef Py_ssize_t i
    m[0] = mu0
    C[0] = C0
    for i in range(n):
        R = C[i] + wa[i]
        S = R + eta_v
        v = ya[i] - m[i]
        K = R / S
        m[i + 1] = m[i] + K * v
        C[i + 1] = R - K * R
        loglik += -0.5 * (_LOG2PI + log(S) + v * v / S)
    return m, C, loglik


def ffbs_draw(m, C, w, z):
    cdef cnp.ndarray[double, ndim=1] ma = np.ascontiguousarray(m, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] Ca = np.ascontiguousarray(C, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] wa = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] za = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = ma.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] x = np.empty(n + 1)
    cdef double denom, gain, mean, var
    cdef Py_ssize_t i
    x[n] = ma[n] + sqrt(Ca[n]) * za[n]
    for i in range(n - 1, -1, -1):
        denom = Ca[i] + wa[i]
        if denom < _VAR_FLOOR:
            denom = _VAR_FLOOR
        gain = Ca[i] / denom
        mean = ma[i] + gain * (x[i + 1] - ma[i])
        var = Ca[i] - gain * Ca[i]
        if var < 0.0:
            var = 0.0
        x[i] = mean + sqrt(var) * za[i]
    return x


def gamma_sde_scan(g, double x0, double t0, double dt, double scale,
                   sigma_table, double table_dx, boundaries,
                   Py_ssize_t k_start, cross_t, cross_x, path_out):
    cdef cnp.ndarray[double, ndim=1] ga = np.ascontiguousarray(g, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] tab = np.ascontiguousarray(sigma_table, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] bd = np.ascontiguousarray(boundaries, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] ct = cross_t
    cdef cnp.ndarray[double, ndim=1] cx = cross_x
    cdef cnp.ndarray[double, ndim=1] po = path_out
    cdef Py_ssize_t n_steps = ga.shape[0]
    cdef Py_ssize_t n_tab = tab.shape[0]
    cdef Py_ssize_t n_bound = bd.shape[0]
    cdef double x = x0
    cdef double t = t0
    cdef Py_ssize_t k = k_start
    cdef Py_ssize_t j, i
    cdef double u, frac, sig
    for j in range(n_steps):
        u = x / table_dx
        i = <Py_ssize_t> u
        if i >= n_tab - 1:
            i = n_tab - 2
        frac = u - i
        sig = tab[i] + frac * (tab[i + 1] - tab[i])
        x = x + scale * sig * ga[j]
        t = t + dt
        po[j] = x
        while k < n_bound and x >= bd[k]:
            ct[k] = t
            cx[k] = x
            k += 1
        if k == n_bound:
            return j + 1, x, t, k
    return n_steps, x, t, k
