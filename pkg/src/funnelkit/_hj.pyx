# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled upwind steps for the funnel level set.

Each step computes phi - lam * max_v L_v(phi), where L_v is the first-order
upwind derivative of phi along the candidate velocity v.  Grid edges use
constant extension.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def hj_step_1d(double[::1] phi, double[:, ::1] vel, double lam):
    cdef Py_ssize_t n = phi.shape[0]
    cdef Py_ssize_t m = vel.shape[1]
    cdef Py_ssize_t i, j
    cdef double c, dm, dp, v, L, best
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        c = phi[i]
        dm = c - phi[i - 1] if i > 0 else 0.0
        dp = phi[i + 1] - c if i < n - 1 else 0.0
        best = -1e300
        for j in range(m):
            v = vel[i, j]
            if v > 0:
                L = v * dm
            else:
                L = v * dp
            if L > best:
                best = L
        o[i] = c - lam * best
    return out


def hj_step_2d(double[:, ::1] phi, double[:, :, :, ::1] vel, double lam):
    cdef Py_ssize_t nx = phi.shape[0]
    cdef Py_ssize_t ny = phi.shape[1]
    cdef Py_ssize_t m = vel.shape[2]
    cdef Py_ssize_t i, k, j
    cdef double c, dxm, dxp, dym, dyp, vx, vy, L, best
    out = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(nx):
        for k in range(ny):
            c = phi[i, k]
            dxm = c - phi[i - 1, k] if i > 0 else 0.0
            dxp = phi[i + 1, k] - c if i < nx - 1 else 0.0
            dym = c - phi[i, k - 1] if k > 0 else 0.0
            dyp = phi[i, k + 1] - c if k < ny - 1 else 0.0
            best = -1e300
            for j in range(m):
                vx = vel[i, k, j, 0]
                vy = vel[i, k, j, 1]
                L = (vx * dxm if vx > 0 else vx * dxp) + (vy * dym if vy > 0 else vy * dyp)
                if L > best:
                    best = L
            o[i, k] = c - lam * best
    return out
